//! Quadrature rules on the reference triangle and on intervals.

/// Quadrature point on the reference triangle, barycentric coordinates
/// `(l0, l1, l2)` and a weight that sums to 1 over the rule (multiply by the
/// element area).
#[derive(Clone, Copy, Debug)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

const fn sym3(a: f64, b: f64, w: f64) -> [TriPoint; 3] {
    [
        TriPoint { bary: [a, b, b], weight: w },
        TriPoint { bary: [b, a, b], weight: w },
        TriPoint { bary: [b, b, a], weight: w },
    ]
}

const fn sym6(a: f64, b: f64, c: f64, w: f64) -> [TriPoint; 6] {
    [
        TriPoint { bary: [a, b, c], weight: w },
        TriPoint { bary: [a, c, b], weight: w },
        TriPoint { bary: [b, a, c], weight: w },
        TriPoint { bary: [b, c, a], weight: w },
        TriPoint { bary: [c, a, b], weight: w },
        TriPoint { bary: [c, b, a], weight: w },
    ]
}

/// Strang-Fix / Dunavant 6-point rule, exact for polynomials of degree 4.
pub fn triangle_degree4() -> Vec<TriPoint> {
    let mut pts = Vec::with_capacity(6);
    pts.extend(sym3(0.108_103_018_168_070, 0.445_948_490_915_965, 0.223_381_589_678_011));
    pts.extend(sym3(0.816_847_572_980_459, 0.091_576_213_509_771, 0.109_951_743_655_322));
    pts
}

/// Dunavant 12-point rule, exact for polynomials of degree 6.
pub fn triangle_degree6() -> Vec<TriPoint> {
    let mut pts = Vec::with_capacity(12);
    pts.extend(sym3(0.501_426_509_658_179, 0.249_286_745_170_910, 0.116_786_275_726_379));
    pts.extend(sym3(0.873_821_971_016_996, 0.063_089_014_491_502, 0.050_844_906_370_207));
    pts.extend(sym6(
        0.053_145_049_844_817,
        0.310_352_451_033_784,
        0.636_502_499_121_399,
        0.082_851_075_618_374,
    ));
    pts
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let (x, w): (&[f64], &[f64]) = match n {
        1 => (&[0.0], &[2.0]),
        2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
        3 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[0.555_555_555_555_555_6, 0.888_888_888_888_888_9, 0.555_555_555_555_555_6],
        ),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_9,
                0.652_145_154_862_546_1,
                0.652_145_154_862_546_1,
                0.347_854_845_137_453_9,
            ],
        ),
        5 => (
            &[
                -0.906_179_845_938_664,
                -0.538_469_310_105_683_1,
                0.0,
                0.538_469_310_105_683_1,
                0.906_179_845_938_664,
            ],
            &[
                0.236_926_885_056_189_1,
                0.478_628_670_499_366_5,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_5,
                0.236_926_885_056_189_1,
            ],
        ),
        _ => panic!("gauss_legendre_unit supports 1..=5 points, got {n}"),
    };
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| (0.5 * (xi + 1.0), 0.5 * wi))
        .collect()
}
