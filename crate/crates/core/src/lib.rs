pub mod model;
pub mod path;
pub mod writer;
pub mod validator;
pub mod cognicrypt;
pub mod convert;
pub mod crysl;
pub mod aggregate;
pub mod cli;
