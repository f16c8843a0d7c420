use super::ProblemConfig;

/// A built-in problem.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub config: &'static str,
}

impl CatalogEntry {
    pub fn problem(&self) -> ProblemConfig {
        ProblemConfig::parse(self.config).expect("catalog configs are valid")
    }
}

const PAPER_EXAMPLE: &str = include_str!("../../configs/paper_example.cfg");

const FREE_PARTICLE: &str = include_str!("../../configs/free_particle.cfg");

const DELAYED_SMOKE: &str = include_str!("../../configs/delayed_smoke.cfg");

const ENTRIES: [CatalogEntry; 3] = [
    CatalogEntry {
        name: "paper_example",
        description: "L = x*v^2 on [1, e] with triangular end values, invariant under (tau, zeta) = (2x ln x, q); conserves 2(x q v - v^2 x^2 ln x)",
        config: PAPER_EXAMPLE,
    },
    CatalogEntry {
        name: "free_particle",
        description: "L = v^2 on [0, 1], translation generator (no tau, zeta = 1); conserves the momentum 2v",
        config: FREE_PARTICLE,
    },
    CatalogEntry {
        name: "delayed_smoke",
        description: "delay-free L = v^2 on [0, 2] run through the delayed path (tau_d = 1, zero history, zero generator)",
        config: DELAYED_SMOKE,
    },
];

/// All built-in problems.
pub fn catalog() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn catalog_entry(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_parse() {
        for e in catalog() {
            let c = e.problem();
            assert!(c.nodes >= 2, "{}", e.name);
        }
        assert!(catalog_entry("paper_example")
            .unwrap()
            .description
            .contains("(2x ln x, q)"));
        assert!(catalog_entry("delayed_smoke")
            .unwrap()
            .problem()
            .delay
            .is_some());
        assert!(catalog_entry("nope").is_none());
    }
}
