//! Bundled scenario configurations.

pub const SCENARIOS: &[(&str, &str)] = &[
    (
        "skew-weight-quartic",
        "# quartic wells, eta = 1 + t on (-1, 1), mass 1 (interface at 0)\n\
         potential.kind = quartic\n\
         weight.kind = affine\n\
         weight.a0 = 1.0\n\
         weight.a1 = 1.0\n\
         weight.t_lo = -1.0\n\
         weight.t_hi = 1.0\n\
         run.mass = 1.0\n\
         run.mode = recovery\n\
         run.threshold = 0.02\n",
    ),
    (
        "skew-weight-quartic-minimize",
        "potential.kind = quartic\n\
         weight.kind = affine\n\
         weight.a0 = 1.0\n\
         weight.a1 = 1.0\n\
         weight.t_lo = -1.0\n\
         weight.t_hi = 1.0\n\
         run.mass = 1.0\n\
         run.mode = minimize\n\
         run.threshold = 0.05\n",
    ),
    (
        "flat-weight-quartic",
        "# uniform weight: the excess vanishes for symmetric wells\n\
         potential.kind = quartic\n\
         weight.kind = uniform\n\
         weight.value = 1.0\n\
         weight.t_lo = -1.0\n\
         weight.t_hi = 1.0\n\
         run.mass = 0.0\n\
         run.mode = recovery\n\
         run.threshold = 0.02\n",
    ),
    (
        "subquadratic-null",
        "# symmetric subquadratic wells: the second-order limit is exactly 0\n\
         potential.kind = subquadratic\n\
         potential.q = 0.5\n\
         weight.kind = affine\n\
         weight.a0 = 1.0\n\
         weight.a1 = 1.0\n\
         weight.t_lo = -1.0\n\
         weight.t_hi = 1.0\n\
         run.mass = 1.0\n\
         run.mode = recovery\n\
         run.abs_threshold = 1e-2\n",
    ),
    (
        "skewed-flat-control",
        "# asymmetric wells with a flat weight: eta'(t0) = 0 forces the limit to 0\n\
         potential.kind = skewed\n\
         potential.p = 0.3\n\
         weight.kind = uniform\n\
         weight.value = 1.0\n\
         weight.t_lo = -1.0\n\
         weight.t_hi = 1.0\n\
         run.mass = 0.0\n\
         run.mode = recovery\n\
         run.abs_threshold = 1e-2\n",
    ),
    (
        "skewed-skew-weight",
        "# asymmetric wells with the skew weight: full prediction exercised\n\
         potential.kind = skewed\n\
         potential.p = 0.3\n\
         weight.kind = affine\n\
         weight.a0 = 1.0\n\
         weight.a1 = 1.0\n\
         weight.t_lo = -1.0\n\
         weight.t_hi = 1.0\n\
         run.mass = 1.0\n\
         run.mode = recovery\n\
         run.threshold = 0.10\n",
    ),
    (
        "quarter-disk",
        "# quarter disk of radius 1/2 in the unit square, via the level-set weight\n\
         potential.kind = quartic\n\
         weight.kind = levelset\n\
         weight.set = quarter_disk\n\
         weight.r = 0.5\n\
         run.mode = recovery\n\
         run.threshold = 0.05\n",
    ),
    (
        "strip",
        "# flat interface: zero curvature, zero second-order limit\n\
         potential.kind = quartic\n\
         weight.kind = levelset\n\
         weight.set = strip\n\
         weight.s = 0.5\n\
         run.mode = recovery\n\
         run.abs_threshold = 1e-2\n",
    ),
    (
        "centered-disk",
        "# disk of radius 1/4 centered in the unit square\n\
         potential.kind = quartic\n\
         weight.kind = levelset\n\
         weight.set = centered_disk\n\
         weight.r = 0.25\n\
         run.mode = recovery\n\
         run.threshold = 0.05\n",
    ),
    (
        "rearranged-square",
        "# weight from the rearranged unit square pinned at v_m = 0.25, where\n\
         # the arc branch of the profile carries curvature sqrt(pi)\n\
         potential.kind = quartic\n\
         weight.kind = rearranged\n\
         weight.v_m = 0.25\n\
         run.mass = 0.5\n\
         run.mode = recovery\n\
         run.threshold = 0.05\n",
    ),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|(n, _)| *n).collect()
}
