pub mod experiment;
pub mod grammar;
pub mod joint;
pub mod logic;
pub mod perception;
pub mod scenes;
