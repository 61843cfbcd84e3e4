//! Built-in term families and the hypotheses each can satisfy.

use loewner::diagnostics::hypothesis::*;

pub struct Entry {
    pub family: &'static str,
    pub config: &'static str,
    pub description: &'static str,
    /// Hypotheses whose verdict holds for the standard catalogue parameters.
    pub hypotheses: &'static [&'static str],
}

pub const ENTRIES: [Entry; 7] = [
    Entry {
        family: "HalfPlane",
        config: "half_plane { k }",
        description: "Re p > k: map onto the half-plane shifted by k, 0 <= k < 1",
        hypotheses: &[INVERSE_CONTINUITY, REAL_PART_LOWER_BOUND],
    },
    Entry {
        family: "Strip",
        config: "strip { a, b }",
        description: "vertical strip a < Re p < b, 0 < a < 1 < b",
        hypotheses: &[INVERSE_CONTINUITY, HOLDER_BOUNDARY, REAL_PART_LOWER_BOUND, REAL_PART_STRIP],
    },
    Entry {
        family: "Sector",
        config: "sector { c | alpha }",
        description: "symmetric sector |arg p| < απ/2, C = tan(απ/2)",
        hypotheses: &[INVERSE_CONTINUITY, HOLDER_BOUNDARY, BOUNDED_ARGUMENT],
    },
    Entry {
        family: "PointKernel",
        config: "point_kernel { driver }",
        description: "single-point kernel (e^{iu(t)} + z)/(e^{iu(t)} - z); slit and quasislit growth",
        hypotheses: &[DRIVER_QUASISLIT],
    },
    Entry {
        family: "Measure",
        config: "measure { atoms | samples }",
        description: "Herglotz sum over a discrete probability measure; poles at the atoms",
        hypotheses: &[],
    },
    Entry {
        family: "Composed",
        config: "composed { base, map }",
        description: "p(phi(z)) for a self-map phi of the disc; H never increases",
        hypotheses: &[INVERSE_CONTINUITY, HOLDER_BOUNDARY, BOUNDED_ARGUMENT, RECTIFIABLE_QUASICONFORMAL],
    },
    Entry {
        family: "Constant",
        config: "constant { re, im }",
        description: "constant c with Re c > 0; exact flow w = z e^{-ct}",
        hypotheses: &[
            INVERSE_CONTINUITY,
            HOLDER_BOUNDARY,
            RECTIFIABLE_QUASICONFORMAL,
            REAL_PART_LOWER_BOUND,
            REAL_PART_STRIP,
            BOUNDED_ARGUMENT,
        ],
    },
];

/// Stable text listing, one block per family.
pub fn list_catalogue() -> String {
    let mut s = String::new();
    for e in &ENTRIES {
        let hypotheses = if e.hypotheses.is_empty() { "none".to_string() } else { e.hypotheses.join(", ") };
        s.push_str(&format!("{}\n  config: {}\n  {}\n  hypotheses: {hypotheses}\n", e.family, e.config, e.description));
    }
    s.push_str("\nWrappers: scaled { gain, base }, shifted { offset, base }, normalized { base }, schedule { pieces }\n");
    s
}
