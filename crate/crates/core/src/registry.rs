//! Name-keyed registries of interchangeable implementations.

use crate::error::{Error, Result};

pub struct Registry<T> {
    entries: Vec<(&'static str, T)>,
}

impl<T> Registry<T> {
    pub const fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn register(mut self, name: &'static str, item: T) -> Self {
        assert!(
            self.entries.iter().all(|(n, _)| *n != name),
            "duplicate registry entry `{name}`"
        );
        self.entries.push((name, item));
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, item)| item)
            .ok_or_else(|| Error::UnknownName(name.to_owned()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|(n, _)| *n)
    }
}

impl<T> Default for Registry<T> {
    fn default() -> Self {
        Self::new()
    }
}
