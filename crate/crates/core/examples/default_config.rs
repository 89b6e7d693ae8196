//! Print the built-in configuration as TOML.

fn main() {
    print!("{}", hess_core::config::ToolkitConfig::default().to_toml_string());
}
