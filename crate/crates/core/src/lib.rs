pub mod config;
pub mod geom;
pub mod scene;
pub mod sim;
pub mod featmap;
pub mod attention;
pub mod controller;
pub mod planner;
pub mod tasks;
pub mod eval;
pub mod viz;
pub mod cli;
