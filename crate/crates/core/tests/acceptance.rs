//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use conescale::barrier::{theta, BarrierPoint};
use conescale::bounds::{
    big_log2, cyclic_ruled_out, zero_one_chain_exact, zero_one_d_star, zero_one_family_count, zero_one_n_star,
    zero_one_ruled_out,
};
use conescale::cone::{sample_dual_point, sample_point, BlockKind, ConeDescriptor};
use conescale::encoding::RhoVariant;
use conescale::net::{expansion_coefficients, max_volume_subsystem, net_cardinality_bound, NetMode, NetSpec};
use conescale::pipeline::{run_instance, PipelineOptions};
use conescale::polytope::zero_one_instance;
use conescale::recovery::{counterexample_search, recover_linear_maps, verify_automorphism};
use conescale::scaling::{nt_scaling_point, nt_scaling_point_iterative, normalize_factorization, Factorization, SolverOptions};

type Outcome = std::result::Result<String, String>;

fn product(blocks: Vec<BlockKind>) -> ConeDescriptor {
    ConeDescriptor::new(blocks).unwrap()
}

fn random_factorization(cone: &ConeDescriptor, rng: &mut ChaCha8Rng) -> Factorization {
    let scale = |rng: &mut ChaCha8Rng| rng.gen_range(-2.0f64..2.0).exp();
    let na = rng.gen_range(1..=8);
    let nb = rng.gen_range(1..=8);
    let a = (0..na).map(|k| sample_point(cone, rng, k > 0) * scale(rng)).collect();
    let b = (0..nb).map(|k| sample_dual_point(cone, rng, k > 0) * scale(rng)).collect();
    Factorization::new(cone.clone(), a, b, None).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let families: Vec<(&str, Box<dyn Fn(&mut ChaCha8Rng) -> ConeDescriptor>)> = vec![
        ("orthant", Box::new(|r| ConeDescriptor::orthant(r.gen_range(1..=20)))),
        ("soc", Box::new(|r| ConeDescriptor::second_order(r.gen_range(2..=10)))),
        ("psd", Box::new(|r| ConeDescriptor::psd(r.gen_range(1..=5)))),
        (
            "orthant×soc",
            Box::new(|_| product(vec![BlockKind::Orthant { dim: 3 }, BlockKind::SecondOrder { dim: 4 }])),
        ),
        (
            "soc×psd×orthant",
            Box::new(|_| {
                product(vec![BlockKind::SecondOrder { dim: 3 }, BlockKind::Psd { side: 2 }, BlockKind::Orthant { dim: 2 }])
            }),
        ),
    ];
    let opts = SolverOptions::default();
    let mut worst_ratio = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for (name, make) in &families {
        for i in 0..200 {
            let cone = make(&mut rng);
            let fac = random_factorization(&cone, &mut rng);
            let (_, cert) = normalize_factorization(&fac, &opts).map_err(|e| format!("{name} #{i}: {e}"))?;
            let bound = theta(&cone).unwrap() as f64 * fac.delta();
            let m = cert.max_primal_norm_sq.max(cert.max_dual_norm_sq);
            if m > bound * (1.0 + 1e-6) {
                return Err(format!("{name} #{i}: max norm² {m} > ϑΔ = {bound}"));
            }
            if cert.kkt_residual > 1e-6 * (1.0 + fac.delta()) {
                return Err(format!("{name} #{i}: KKT residual {}", cert.kkt_residual));
            }
            worst_ratio = worst_ratio.max(m / bound);
            worst_kkt = worst_kkt.max(cert.kkt_residual / (1.0 + fac.delta()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("1000 instances took {secs:.1} s"));
    }
    Ok(format!("1000 instances, max norm²/ϑΔ = {worst_ratio:.6}, max KKT/(1+Δ) = {worst_kkt:.1e}, {secs:.1} s"))
}

fn nt_cones() -> Vec<(&'static str, ConeDescriptor)> {
    vec![
        ("orthant", ConeDescriptor::orthant(6)),
        ("soc", ConeDescriptor::second_order(5)),
        ("psd", ConeDescriptor::psd(3)),
        ("product", product(vec![BlockKind::Orthant { dim: 2 }, BlockKind::SecondOrder { dim: 3 }, BlockKind::Psd { side: 2 }])),
    ]
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut worst_res, mut worst_cf) = (0.0f64, 0.0f64);
    for (name, cone) in nt_cones() {
        for i in 0..100 {
            let a = sample_point(&cone, &mut rng, false);
            let b = sample_dual_point(&cone, &mut rng, false);
            let w = nt_scaling_point(&cone, &a, &b).map_err(|e| format!("{name} #{i}: {e}"))?;
            let r = (BarrierPoint::new(&cone, &w).unwrap().hessian_apply(&a) - &b).norm() / b.norm();
            if r > 1e-8 {
                return Err(format!("{name} #{i}: residual {r:e}"));
            }
            worst_res = worst_res.max(r);
            if name == "orthant" || name == "psd" {
                let wi = nt_scaling_point_iterative(&cone, &a, &b).map_err(|e| format!("{name} #{i}: {e}"))?;
                let gap = (&w - &wi).norm() / w.norm();
                if gap > 1e-9 {
                    return Err(format!("{name} #{i}: closed form vs Newton differ by {gap:e}"));
                }
                worst_cf = worst_cf.max(gap);
            }
        }
    }
    Ok(format!("400 pairs, max residual {worst_res:.1e}, closed form vs Newton {worst_cf:.1e}"))
}

fn barrier_cones() -> Vec<ConeDescriptor> {
    vec![
        ConeDescriptor::orthant(5),
        ConeDescriptor::second_order(4),
        ConeDescriptor::psd(3),
        product(vec![BlockKind::Orthant { dim: 2 }, BlockKind::Psd { side: 3 }]),
        product(vec![BlockKind::SecondOrder { dim: 3 }, BlockKind::Orthant { dim: 1 }, BlockKind::Psd { side: 2 }]),
    ]
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let cones = barrier_cones();
    let mut worst_fd = 0.0f64;
    for k in 0..1000 {
        let cone = &cones[k % cones.len()];
        let th = theta(cone).unwrap() as f64;
        let x = sample_point(cone, &mut rng, false);
        let p = BarrierPoint::new(cone, &x).unwrap();
        let g = p.neg_gradient();
        let fail = |what: &str, v: f64| Err(format!("point {k}: {what} ({v:e})"));
        let c = (p.hessian_apply(&x) - &g).norm();
        if c > 1e-9 * g.norm() {
            return fail("∇²F(x)x ≠ −∇F(x)", c);
        }
        let hom = (g.dot(&x) - th).abs();
        if hom > 1e-9 * th {
            return fail("⟨−∇F(x),x⟩ ≠ ϑ", hom);
        }
        let h = DVector::from_fn(cone.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let (lhs, rhs) = (g.dot(&h).powi(2), th * p.hessian_apply(&h).dot(&h));
        if lhs > rhs * (1.0 + 1e-8) {
            return fail("inequality (b)", lhs - rhs);
        }
        let hc = sample_point(cone, &mut rng, true);
        let (lhs, rhs) = (p.hessian_apply(&hc).dot(&hc), g.dot(&hc).powi(2));
        if lhs > rhs * (1.0 + 1e-8) {
            return fail("inequality (f)", lhs - rhs);
        }
        let hd = sample_dual_point(cone, &mut rng, true);
        let (lhs, rhs) = (p.hessian_inverse_apply(&hd).dot(&hd), x.dot(&hd).powi(2));
        if lhs > rhs * (1.0 + 1e-8) {
            return fail("inequality (g)", lhs - rhs);
        }
        if !cone.dual_contains_interior(&g, 0.0).unwrap() {
            return fail("−∇F(x) outside int C★", 0.0);
        }
        let back = p.conjugate_gradient_map().unwrap();
        let rt = (&back - &x).norm();
        if rt > 1e-9 * x.norm() {
            return fail("−∇F(−∇F(x)) ≠ x", rt);
        }
        let op = p.hessian_sqrt().unwrap();
        if k % 10 == 0 {
            let rep = verify_automorphism(cone, &op.to_matrix(), 100, 1e-9, &mut rng).unwrap();
            if !(rep.forward_ok && rep.inverse_ok) {
                return fail("Hessian square root is not an automorphism", rep.worst_margin);
            }
            let rep = verify_automorphism(cone, &p.hessian_matrix(), 100, 1e-9, &mut rng).unwrap();
            if !(rep.forward_ok && rep.inverse_ok) {
                return fail("Hessian is not an automorphism", rep.worst_margin);
            }
        }
        let sq = (op.apply(&op.apply(&h)) - p.hessian_apply(&h)).norm();
        if sq > 1e-8 * p.hessian_apply(&h).norm() {
            return fail("L(L h) ≠ ∇²F(x)h", sq);
        }
        // Central differences on a well-conditioned point e + s/‖s‖.
        let s = sample_point(cone, &mut rng, false);
        let y = cone.identity_point() + &s / s.norm();
        let py = BarrierPoint::new(cone, &y).unwrap();
        let grad = py.gradient();
        let step = 1e-5;
        let fd = DVector::from_fn(cone.dim(), |i, _| {
            let mut e = DVector::zeros(cone.dim());
            e[i] = step;
            let fp = BarrierPoint::new(cone, &(&y + &e)).unwrap().value();
            let fm = BarrierPoint::new(cone, &(&y - &e)).unwrap().value();
            (fp - fm) / (2.0 * step)
        });
        let rel = (&fd - &grad).norm() / grad.norm();
        if rel > 1e-5 {
            return fail("finite-difference gradient", rel);
        }
        worst_fd = worst_fd.max(rel);
    }
    Ok(format!("1000 points over 5 cones, worst finite-difference error {worst_fd:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = rng.gen_range(1..=12);
        let g = DMatrix::from_fn(n, n, |r, c| rng.gen_range(-1.0..1.0) + if r == c { 3.0 } else { 0.0 });
        let git = g.clone().try_inverse().unwrap().transpose();
        let rand_vecs = |k: usize, rng: &mut ChaCha8Rng| -> Vec<DVector<f64>> {
            (0..k).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect()
        };
        let a = rand_vecs(n + rng.gen_range(0..4), &mut rng);
        let b = rand_vecs(n + rng.gen_range(0..4), &mut rng);
        let ai: Vec<_> = a.iter().map(|x| &g * x).collect();
        let bi: Vec<_> = b.iter().map(|y| &git * y).collect();
        let maps = recover_linear_maps(&a, &ai, &b, &bi).map_err(|e| format!("#{i}: {e}"))?;
        let err = (&maps.q - &git).norm() / git.norm();
        if err > 1e-8 {
            return Err(format!("#{i} (n = {n}): ‖Q − G^(−T)‖/‖G^(−T)‖ = {err:e}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("100 round trips, worst relative error {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for m in [1.0, 10.0, 100.0] {
        let rec = counterexample_search(m, (-10.0, 10.0), 4001).map_err(|e| e.to_string())?;
        let min = rec.minima.iter().map(|f| f.max_norm).fold(f64::INFINITY, f64::min);
        if rec.delta != 0.0 {
            return Err(format!("M = {m}: Δ = {}", rec.delta));
        }
        if rec.minima.len() != 2 || min < std::f64::consts::SQRT_2 * m - 1e-9 * m || !rec.certified {
            return Err(format!("M = {m}: min max-norm {min} below √2·M"));
        }
        lines.push(format!("M={m}: {min:.6}"));
    }
    Ok(format!("Δ = 0, min max-norm {}", lines.join(", ")))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let opts = PipelineOptions::default();
    let mut keys = Vec::new();
    for mask in 0u32..16 {
        let subset: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let inst = zero_one_instance(3, &subset).map_err(|e| e.to_string())?;
        let run = run_instance(&inst, &opts).map_err(|e| format!("subset {subset:?}: {e}"))?;
        if !run.exact {
            return Err(format!("subset {subset:?}: V̄ = {:?}, V = {:?}", run.reconstruction.accepted, inst.v));
        }
        keys.push(run.encoded.key());
    }
    keys.sort();
    keys.dedup();
    let secs = start.elapsed().as_secs_f64();
    if keys.len() != 16 {
        return Err(format!("only {} distinct encodings", keys.len()));
    }
    if secs >= 300.0 {
        return Err(format!("took {secs:.1} s"));
    }
    Ok(format!("16/16 exact, 16 distinct encodings, {secs:.2} s"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let dim = rng.gen_range(1..=8);
        let count = rng.gen_range(dim..=6 * dim + 4);
        let rank = if i % 5 == 0 { rng.gen_range(1..=dim) } else { dim };
        let basis: Vec<DVector<f64>> =
            (0..rank).map(|_| DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))).collect();
        let rows: Vec<DVector<f64>> = (0..count)
            .map(|_| basis.iter().fold(DVector::zeros(dim), |s, b| s + b * rng.gen_range(-3.0..3.0)))
            .collect();
        let sel = max_volume_subsystem(&rows).map_err(|e| format!("#{i}: {e}"))?;
        let nu = expansion_coefficients(&rows, &sel);
        let m = nu.amax();
        if m > 1.0 + 1e-9 {
            return Err(format!("#{i}: |ν| = {m}"));
        }
        worst = worst.max(m);
    }
    Ok(format!("100 families, max |ν| = {worst:.12}"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for n in [2usize, 3, 4, 6] {
        let spec = NetSpec::new(n, 1.0, 0.1, NetMode::ImplicitLattice).map_err(|e| e.to_string())?;
        let mut ok = 0;
        for k in 0..10_000 {
            let dir = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)).normalize();
            let r = if k % 10 == 0 { 1.0 } else { rng.gen::<f64>().powf(1.0 / n as f64) };
            let u = dir * r;
            let v = spec.round(&u).map_err(|e| e.to_string())?;
            if (&u - &v).norm() <= spec.eps {
                ok += 1;
            }
        }
        if ok != 10_000 {
            return Err(format!("n = {n}: {ok}/10000 covered"));
        }
    }
    let b = net_cardinality_bound(3, 1.0, 1.0 / 3.0).map_err(|e| e.to_string())?;
    if (b - 1363.5).abs() > 0.1 {
        return Err(format!("net bound {b}"));
    }
    let mut worst = 0.0f64;
    for d in 2..=6 {
        for n in [3usize, 4, 7, 12, 30] {
            for variant in [RhoVariant::DPlusOne, RhoVariant::NPlusOne] {
                let r = zero_one_ruled_out(d, n, 10.0, variant).map_err(|e| e.to_string())?;
                let exact = big_log2(&zero_one_chain_exact(d, n, 10, variant));
                let lhs = big_log2(&zero_one_family_count(d));
                let rel = ((r.chain_rhs_log2 - exact).abs() / exact).max((r.lhs_log2 - lhs).abs() / lhs);
                if rel > 1e-12 {
                    return Err(format!("d = {d}, n = {n}: log vs exact relative gap {rel:e}"));
                }
                worst = worst.max(rel);
            }
        }
    }
    Ok(format!("covering 4×10⁴/4×10⁴, bound(3,1,1/3) = {b:.4}, chain log vs exact ≤ {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let v = RhoVariant::DPlusOne;
    let r20 = zero_one_ruled_out(20, 100, 10.0, v).map_err(|e| e.to_string())?;
    let r21 = zero_one_ruled_out(21, 100, 10.0, v).map_err(|e| e.to_string())?;
    if r20.ruled_out || !r21.ruled_out {
        return Err(format!("d=20: {}, d=21: {}", r20.ruled_out, r21.ruled_out));
    }
    // Once ruled out in d, stays ruled out.
    for (n, fc) in [(100usize, 10.0), (10, 1.0), (1000, 100.0), (50, 3.0)] {
        let mut seen = false;
        for d in 2..=60 {
            let r = zero_one_ruled_out(d, n, fc, v).map_err(|e| e.to_string())?.ruled_out;
            if seen && !r {
                return Err(format!("n={n}, f_C={fc}: ruled out at d−1 but not at d={d}"));
            }
            seen |= r;
        }
        if zero_one_d_star(n, fc, 2, 60, v).map_err(|e| e.to_string())?.is_none() {
            return Err(format!("n={n}, f_C={fc}: no finite d*"));
        }
    }
    for (d, n, fc) in [(3usize, 20usize, 5.0), (2, 10, 1.0), (4, 30, 10.0)] {
        let mut seen = false;
        for t in (0..2_000_000u64).step_by(4999) {
            let r = cyclic_ruled_out(d, t, n, fc, v).map_err(|e| e.to_string())?.ruled_out;
            if seen && !r {
                return Err(format!("cyclic d={d}: not monotone at t={t}"));
            }
            seen |= r;
        }
        if !seen {
            return Err(format!("cyclic d={d}, n={n}: never ruled out"));
        }
    }
    // log₂(n*·f_C), with n* the smallest admissible n not ruled out.
    let fc = 10.0;
    let thr: Vec<(f64, f64)> = (5..=30)
        .map(|d| zero_one_n_star(d, fc, v).map(|n| (d as f64, (n as f64 * fc).log2())))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    if thr.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err("threshold not monotone in d".into());
    }
    let free: Vec<_> = thr.iter().filter(|(_, l)| *l > (3.0 * fc).log2()).copied().collect();
    let k = free.len() as f64;
    let (mx, my) = (free.iter().map(|p| p.0).sum::<f64>() / k, free.iter().map(|p| p.1).sum::<f64>() / k);
    let slope = free.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / free.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let min_step = free.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::INFINITY, f64::min);
    if free.len() < 10 || slope < 0.4 || min_step < 0.4 {
        return Err(format!("threshold growth: slope {slope:.3}, min step {min_step:.3} over {} dims", free.len()));
    }
    Ok(format!(
        "d=20 not ruled out, d=21 ruled out; sweeps monotone; log₂(n*·f_C) slope {slope:.3}/dim (min step {min_step:.3}) for d ∈ [{}, 30]",
        free[0].0
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("normalization bound", criterion_1),
        ("Nesterov–Todd scaling", criterion_2),
        ("barrier identities", criterion_3),
        ("map recovery", criterion_4),
        ("counterexample certificate", criterion_5),
        ("encode/reconstruct pipeline", criterion_6),
        ("max-volume selection", criterion_7),
        ("net properties", criterion_8),
        ("counting thresholds", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(f) {
            Ok(Ok(msg)) => println!("criterion {}: PASS {name}: {msg}", i + 1),
            Ok(Err(msg)) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {msg}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: panicked", i + 1);
            }
        }
    }
    println!("acceptance: {}/9 passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
