use ncphase_core::dynamics::evolution;
use ncphase_core::probes::{probe_cloud, ProbeSpec};
use ncphase_core::smoothing::hbar0_static_reduction;
use ncphase_core::wigner::{wigner_4d, wigner_marginal_y};
use ncphase_core::{build, derive, Mat4, ParamSet, PhasePoint, QuadratureRule, Smoother, TestFunction};

/// `E[exp(−(u−c)ᵀD(u−c))]` for `u ~ N(m, Σ)`:
/// `det(I + 2ΣD)^{−1/2} exp(−(m−c)ᵀ(D⁻¹ + 2Σ)⁻¹(m−c))`.
fn gaussian_bump_expectation(widths: [f64; 4], c: [f64; 4], m: [f64; 4], sigma: &Mat4) -> f64 {
    let d = Mat4::diag(widths.map(|w| 1.0 / (w * w)));
    let mut a = sigma.matmul(&d).scale(2.0);
    let mut b = sigma.scale(2.0);
    for i in 0..4 {
        a.0[i][i] += 1.0;
        b.0[i][i] += widths[i] * widths[i];
    }
    let b_inv = b.inverse().unwrap();
    let diff = [m[0] - c[0], m[1] - c[1], m[2] - c[2], m[3] - c[3]];
    let bd = b_inv.apply(&diff);
    let q: f64 = diff.iter().zip(bd).map(|(x, y)| x * y).sum();
    (-q).exp() / a.determinant().sqrt()
}

#[test]
fn derived_scalars_at_theta_two() {
    let d = derive(&ParamSet::new(1.0, 2.0)).unwrap();
    let s2 = 2f64.sqrt();
    assert!((d.lambda_plus - (s2 + 1.0)).abs() < 1e-14);
    assert!((d.lambda_minus - (s2 - 1.0)).abs() < 1e-14);
    assert!((d.beta + (3.0 + 2.0 * s2).ln()).abs() < 1e-14);
}

#[test]
fn tensor_smoothing_matches_gaussian_formula() {
    let c = [0.5, -0.5, 0.25, 0.0];
    let widths = [1.0, 1.5, 0.8, 1.2];
    let f = TestFunction::gaussian_bump(PhasePoint::from_array(c), widths).unwrap();
    let probes = probe_cloud(&ProbeSpec { count: 40, ..ProbeSpec::default() });
    for (h, t) in [(1.0, 0.1), (0.5, 0.5), (0.3, 0.2), (2.0, 1e-3)] {
        let d = derive(&ParamSet::new(h, t)).unwrap();
        let pm = build(&d).unwrap();
        let sf = Smoother::new(QuadratureRule::tensor(40)).unwrap().smooth(&f, &d, &pm).unwrap();
        // w ~ N(0, I/2) pushed through h
        let sigma = pm.h.matmul(&pm.h.transpose()).scale(0.5);
        for p in &probes {
            let r = p.to_array();
            let want = gaussian_bump_expectation(widths, c, r, &sigma);
            assert!((sf.eval(&r) - want).abs() < 1e-9, "hbar {h} theta {t}: {} vs {want}", sf.eval(&r));
        }
    }
}

#[test]
fn identity_evolution_reproduces_the_static_map() {
    let f = TestFunction::sigmoid_times_gaussian(1.0, [0.2, -0.1], [1.0, 0.7]).unwrap();
    let d = derive(&ParamSet::new(0.7, 0.3)).unwrap();
    let pm = build(&d).unwrap();
    let sm = Smoother::new(QuadratureRule::tensor(10)).unwrap();
    let a = sm.smooth(&f, &d, &pm).unwrap();
    let b = sm.smooth_evolved(&f, &d, &pm, &evolution(&d, 0.0).a_t).unwrap();
    for p in probe_cloud(&ProbeSpec { count: 20, ..ProbeSpec::default() }) {
        assert_eq!(a.eval(&p.to_array()).to_bits(), b.eval(&p.to_array()).to_bits());
    }
}

#[test]
fn static_reduction_of_a_gaussian_profile() {
    // F_inf(y) = e^{-(y1-c1)²/w1²} e^{-(y2-c2)²/w2²}; smoothing with kernel
    // scale s = 2mω√θ widens each factor to w² + s².
    let (c, w) = ([0.2, -0.1], [1.0, 0.7]);
    let f = TestFunction::sigmoid_times_gaussian(1.0, c, w).unwrap();
    // A profile much narrower than the kernel is resolved by fewer nodes.
    for (theta, tol) in [(0.01, 1e-12), (0.1, 1e-12), (1.0, 1e-6)] {
        let p = ParamSet::full(1.3, 0.8, 1.0, theta);
        let s2 = 4.0 * p.m_omega() * p.m_omega() * theta;
        let red = hbar0_static_reduction(&f, &p).unwrap();
        for (y1, y2) in [(0.0, 0.0), (1.0, -0.5), (-2.0, 1.5)] {
            let mut want = 1.0;
            for (y, (ci, wi)) in [(y1, (c[0], w[0])), (y2, (c[1], w[1]))] {
                let v = wi * wi + s2;
                want *= (wi * wi / v).sqrt() * (-(y - ci) * (y - ci) / v).exp();
            }
            assert!((red.eval(y1, y2) - want).abs() < tol, "theta {theta}: {} vs {want}", red.eval(y1, y2));
        }
    }
}

#[test]
fn y_marginal_of_the_4d_wigner_function() {
    for (h, t) in [(1.0, 0.1), (0.2, 0.8)] {
        let d = derive(&ParamSet::new(h, t)).unwrap();
        let pm = build(&d).unwrap();
        let r0 = PhasePoint::new(0.3, -0.4, 0.5, 0.6);
        let full = wigner_4d(&pm, &r0).unwrap().marginal(&[2, 3]).unwrap();
        let direct = wigner_marginal_y(&d, &pm, [0.5, 0.6]).unwrap();
        for u in [[0.5, 0.6], [0.9, 0.1], [-0.5, 1.2]] {
            let (a, b) = (full.density(&u), direct.density(&u));
            assert!((a - b).abs() < 1e-10 * b.max(1.0), "{a} vs {b}");
        }
    }
}
