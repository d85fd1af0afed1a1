//! Cross-checks of the sphere-pair dependence against a direct integral over
//! the sphere in a randomly rotated frame, and against Monte-Carlo samples.

use std::f64::consts::PI;

use mdlab_core::mdep::m_sphere_pair;
use mdlab_core::quadrature::GaussLegendre;
use mdlab_core::sampling::sample_uniform_sphere;
use mdlab_core::{ModelDescriptor, RandomStream, Setting, UnitVec3};

#[allow(clippy::too_many_arguments)]
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫ ||X·λ| − |X'·λ|| / 2π dΩ` with the pole along `X × X'` and the
/// azimuth origin at a random direction in the plane of the pair.
fn direct_sphere_integral(x: &UnitVec3, xp: &UnitVec3, origin_angle: f64) -> f64 {
    let n = x.cross(xp);
    let n = UnitVec3::new(n[0], n[1], n[2]).expect("settings not parallel");
    let ex = {
        let c = n.cross(x);
        let u = UnitVec3::new(c[0], c[1], c[2]).unwrap();
        let (s, co) = origin_angle.sin_cos();
        let v = [0, 1, 2].map(|k| co * x.components()[k] + s * u.components()[k]);
        UnitVec3::new(v[0], v[1], v[2]).unwrap()
    };
    let ey = {
        let c = n.cross(&ex);
        UnitVec3::new(c[0], c[1], c[2]).unwrap()
    };
    let (ax, ay) = (x.dot(&ex), x.dot(&ey));
    let (bx, by) = (xp.dot(&ex), xp.dot(&ey));
    // Both settings lie in the equator, so λ·X = sin θ · (ax cos φ + ay sin φ);
    // the θ integral ∫ sin²θ dθ factors out.
    let theta = GaussLegendre::new(24).integrate(|t: f64| t.sin().powi(2), 0.0, PI);
    let phi = adaptive_simpson(
        |p: f64| {
            let (s, c) = p.sin_cos();
            ((ax * c + ay * s).abs() - (bx * c + by * s).abs()).abs()
        },
        0.0,
        2.0 * PI,
        1e-12,
    );
    theta * phi / (2.0 * PI)
}

#[test]
fn rotational_invariance() {
    let mut rng = RandomStream::new(99, 1, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = sample_uniform_sphere(&mut rng);
        let xp = sample_uniform_sphere(&mut rng);
        let origin = 2.0 * PI * rng.next_f64();
        let direct = direct_sphere_integral(&x, &xp, origin);
        let closed = m_sphere_pair(x.angle_to(&xp)).unwrap();
        worst = worst.max((direct - closed).abs());
    }
    assert!(worst <= 1e-6, "max deviation {worst:e}");
}

#[test]
fn monte_carlo_azimuth_histogram() {
    // Settings in the x-y plane; the density ratio depends only on the
    // azimuth there, so the binned total variation of the azimuth marginals
    // estimates M itself.
    let model = ModelDescriptor::SingletOnesided;
    let n = 1_000_000;
    let bins = 100;
    for beta in [PI / 6.0, PI / 2.0, 2.0 * PI / 3.0] {
        let x = Setting::Direction(UnitVec3::X);
        let xp = Setting::Direction(UnitVec3::new(beta.cos(), beta.sin(), 0.0).unwrap());
        let hist = |s: &Setting, ctx: u64| {
            let mut h = vec![0u64; bins];
            let mut stream = RandomStream::new(5, ctx, 0);
            for _ in 0..n {
                let lambda = match model.sample_lambda(s, &mut stream).unwrap() {
                    mdlab_core::HiddenVar::Direction(v) => v,
                    other => panic!("{other:?}"),
                };
                let phi = lambda.y().atan2(lambda.x()).rem_euclid(2.0 * PI);
                h[((phi / (2.0 * PI) * bins as f64) as usize).min(bins - 1)] += 1;
            }
            h
        };
        let (h1, h2) = (hist(&x, 1), hist(&xp, 2));
        let tv: f64 = h1
            .iter()
            .zip(&h2)
            .map(|(a, b)| (*a as f64 - *b as f64).abs() / n as f64)
            .sum();
        let want = m_sphere_pair(beta).unwrap();
        assert!((tv - want).abs() <= 0.01, "β = {beta}: MC {tv} vs {want}");
    }
}
