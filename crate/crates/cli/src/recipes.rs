//! Named configs shipped with the tool, one per reproduced figure panel.

use crate::config::RunConfig;

pub const RECIPES: &[(&str, &str)] = &[
    ("fig1b", include_str!("../recipes/fig1b.toml")),
    ("fig1c", include_str!("../recipes/fig1c.toml")),
    ("fig1de", include_str!("../recipes/fig1de.toml")),
    ("fig2a", include_str!("../recipes/fig2a.toml")),
    ("fig2b", include_str!("../recipes/fig2b.toml")),
    ("fig2c", include_str!("../recipes/fig2c.toml")),
    ("fig2d", include_str!("../recipes/fig2d.toml")),
    ("fig3b", include_str!("../recipes/fig3b.toml")),
    ("fig4", include_str!("../recipes/fig4.toml")),
    ("fig5b", include_str!("../recipes/fig5b.toml")),
    ("fig5cd", include_str!("../recipes/fig5cd.toml")),
    ("fig6cd", include_str!("../recipes/fig6cd.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    RECIPES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn describe(src: &str) -> String {
    RunConfig::parse(src)
        .ok()
        .map(|c| format!("[{}] {}", c.task.name(), c.description.unwrap_or_default()))
        .unwrap_or_default()
}
