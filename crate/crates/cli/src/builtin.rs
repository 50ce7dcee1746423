//! Scenarios shipped with the binary.

/// `(name, INI text)` pairs, in listing order.
pub const BUILTINS: &[(&str, &str)] = &[
    ("flat", include_str!("../scenarios/flat.ini")),
    ("sphere", include_str!("../scenarios/sphere.ini")),
    ("sphere_equality", include_str!("../scenarios/sphere_equality.ini")),
    ("hyperbolic", include_str!("../scenarios/hyperbolic.ini")),
    ("quadratic_phi", include_str!("../scenarios/quadratic_phi.ini")),
    ("example_2_13", include_str!("../scenarios/example_2_13.ini")),
    ("example_2_14", include_str!("../scenarios/example_2_14.ini")),
    ("condition_A_threshold", include_str!("../scenarios/condition_A_threshold.ini")),
    ("explosive_r4", include_str!("../scenarios/explosive_r4.ini")),
    ("bessel_hitting", include_str!("../scenarios/bessel_hitting.ini")),
    ("feller_decay", include_str!("../scenarios/feller_decay.ini")),
    ("borderline_hsu", include_str!("../scenarios/borderline_hsu.ini")),
];

pub fn find(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Document;
    use crate::scenario::Scenario;

    #[test]
    fn every_builtin_parses_under_its_own_name() {
        for (name, text) in BUILTINS {
            let doc = Document::load(format!("builtin:{name}"), text).unwrap();
            let s = Scenario::from_document(&doc, None).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&s.name, name);
        }
    }
}
