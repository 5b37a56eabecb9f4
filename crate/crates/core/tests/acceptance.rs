//! Release gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use esperanto::algebra::{
    catalog_generators, enumerate_group, is_perfect, plus_subgroup, quotient_index_prime_to_ell,
    symmetrize, Catalog, Matrix, DEFAULT_CAP,
};
use esperanto::graph::{cayley_graph, complete_graph, cycle_graph, schreier_graph, GroupAction};
use esperanto::metrics::{default_exponent_grid, esperantist_fit, FamilyMember, FamilyRecord};
use esperanto::pipeline::{run_with_cache, Cache, ExperimentConfig, ResultRecord, INTERLACING_TOL};
use esperanto::spectral::{lambda1_dense, lambda1_iterative};
use esperanto::surfaces::{
    genus_from_monodromy, gonality_chain, quantitative_gonality, ChainInputs, CoverDescriptor,
    Permutation, REPLAY_TOLERANCE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SPECTRUM_TOL: f64 = 1e-9;
const INTERLACE_TOL: f64 = 1e-8;
const REPLAY_TOL: f64 = 1e-12;
const CACHE_SPEEDUP: f64 = 10.0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

// --- independent 2x2 arithmetic over F_p ---------------------------------

type M2 = [u32; 4];

fn mul2(a: M2, b: M2, p: u32) -> M2 {
    let f = |x: u32, y: u32, z: u32, w: u32| {
        ((x as u64 * y as u64 + z as u64 * w as u64) % p as u64) as u32
    };
    [
        f(a[0], b[0], a[1], b[2]),
        f(a[0], b[1], a[1], b[3]),
        f(a[2], b[0], a[3], b[2]),
        f(a[2], b[1], a[3], b[3]),
    ]
}

fn det2(a: M2, p: u32) -> u32 {
    ((a[0] as u64 * a[3] as u64 + (p as u64 - a[1] as u64 * a[2] as u64 % p as u64)) % p as u64)
        as u32
}

fn brute_sl2(p: u32) -> Vec<M2> {
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    if det2([a, b, c, d], p) == 1 {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

fn closure2(seeds: &[M2], p: u32) -> HashSet<M2> {
    let id = [1, 0, 0, 1];
    let mut seen = HashSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for &s in seeds {
            let y = mul2(s, x, p);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

fn order_is(g: M2, k: u32, p: u32) -> bool {
    let mut x = [1, 0, 0, 1];
    for _ in 0..k {
        x = mul2(g, x, p);
    }
    x == [1, 0, 0, 1] && g != [1, 0, 0, 1]
}

fn cycles(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut c = 0;
    for s in 0..perm.len() {
        if !seen[s] {
            c += 1;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = perm[x];
            }
        }
    }
    c
}

/// Genus of the Γ(2)-Legendre cover by direct cycle counting of left
/// multiplication by `A`, `B` and `AB` on a brute-force `SL_2(F_p)`.
fn legendre_genus_oracle(p: u32) -> u64 {
    let els = brute_sl2(p);
    let idx: HashMap<M2, usize> = els.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let a = [1, 2 % p, 0, 1];
    let b = [1, 0, 2 % p, 1];
    let ab = mul2(a, b, p);
    let perm = |g: M2| -> Vec<usize> { els.iter().map(|&x| idx[&mul2(g, x, p)]).collect() };
    let n = els.len() as i64;
    let chi = -n + (cycles(&perm(a)) + cycles(&perm(b)) + cycles(&perm(ab))) as i64;
    assert_eq!(chi % 2, 0);
    ((2 - chi) / 2) as u64
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).expect("acceptance config is valid")
}

fn members(rec: &ResultRecord) -> impl Iterator<Item = (u32, &esperanto::pipeline::MemberMetrics)> {
    rec.body.members.iter().map(|m| {
        let metrics = m
            .metrics
            .as_ref()
            .unwrap_or_else(|| panic!("ℓ = {} failed: {:?}", m.ell, m.error));
        (m.ell, metrics)
    })
}

// --- criteria ------------------------------------------------------------

fn closed_form_spectra() -> Verdict {
    let cycle_err = (3..=512usize)
        .into_par_iter()
        .map(|n| {
            let exact = 2.0 - 2.0 * (2.0 * PI / n as f64).cos();
            (lambda1_dense(&cycle_graph(n).unwrap()).unwrap().lambda1 - exact).abs()
        })
        .reduce(|| 0.0, f64::max);
    let iter_err = [256usize, 512]
        .iter()
        .map(|&n| {
            let exact = 2.0 - 2.0 * (2.0 * PI / n as f64).cos();
            let r = lambda1_iterative(&cycle_graph(n).unwrap(), 1e-11, 200_000, 100).unwrap();
            (r.lambda1 - exact).abs()
        })
        .fold(0.0, f64::max);
    let complete_err = (4..=50usize)
        .into_par_iter()
        .map(|n| (lambda1_dense(&complete_graph(n).unwrap()).unwrap().lambda1 - n as f64).abs())
        .reduce(|| 0.0, f64::max);
    verdict(
        cycle_err <= SPECTRUM_TOL && iter_err <= SPECTRUM_TOL && complete_err <= SPECTRUM_TOL,
        format!(
            "C_3..C_512 dense max err {cycle_err:.1e}, iterative C_256/C_512 {iter_err:.1e}, K_4..K_50 {complete_err:.1e} (tol {SPECTRUM_TOL:e})"
        ),
    )
}

fn group_orders() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [3u32, 5, 7] {
        let gens = catalog_generators(&Catalog::Sl2Elementary, p).unwrap();
        let enumerated = enumerate_group(&gens, DEFAULT_CAP).unwrap().len();
        let brute = brute_sl2(p).len();
        ok &= enumerated == brute;
        parts.push(format!("{p}:{enumerated}/{brute}"));
    }
    for p in [3u32, 5, 7, 11, 13] {
        let gens = catalog_generators(&Catalog::Sl2Elementary, p).unwrap();
        let enumerated = enumerate_group(&gens, DEFAULT_CAP).unwrap().len();
        let formula = (p * (p * p - 1)) as usize;
        ok &= enumerated == formula;
        parts.push(format!("{p}:{enumerated}={formula}"));
    }
    verdict(
        ok,
        format!("|SL2(F_l)| brute/closed form {}", parts.join(" ")),
    )
}

fn random_invertible(rng: &mut ChaCha8Rng, p: u32) -> M2 {
    loop {
        let m = [0; 4].map(|_| rng.random_range(0..p));
        if det2(m, p) != 0 {
            return m;
        }
    }
}

fn predicates() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in [2u32, 3, 5, 7, 11, 13] {
        let g = enumerate_group(
            &catalog_generators(&Catalog::Sl2Elementary, p).unwrap(),
            DEFAULT_CAP,
        )
        .unwrap();
        let perfect = is_perfect(&g);
        ok &= perfect == (p >= 5);
        if p >= 5 {
            let plus = plus_subgroup(&g, p).unwrap();
            ok &= plus.len() == g.len();
        }
    }
    notes.push("perfect iff l >= 5, G+ = SL2 for l in 5..13".to_string());

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    let mut agree = 0;
    for p in [5u32, 7, 11] {
        for _ in 0..100 {
            let k = rng.random_range(1..=3);
            let seeds: Vec<M2> = (0..k).map(|_| random_invertible(&mut rng, p)).collect();
            let matrices: Vec<Matrix> = seeds
                .iter()
                .map(|s| Matrix::new(2, p, &s.map(|x| x as i64)).unwrap())
                .collect();
            let gens = symmetrize(&matrices, "random").unwrap();
            let g = enumerate_group(&gens, DEFAULT_CAP).unwrap();
            let lib_says = quotient_index_prime_to_ell(&g, p).unwrap();
            let lib_plus = plus_subgroup(&g, p).unwrap().len();

            let oracle_g = closure2(&seeds, p);
            let unipotent: Vec<M2> = oracle_g
                .iter()
                .copied()
                .filter(|&x| order_is(x, p, p))
                .collect();
            let oracle_plus = closure2(&unipotent, p).len();
            let oracle_prime = (oracle_g.len() / oracle_plus) % p as usize != 0;

            checked += 1;
            ok &= lib_says && oracle_prime;
            if g.len() == oracle_g.len() && lib_plus == oracle_plus && lib_says == oracle_prime {
                agree += 1;
            }
        }
    }
    ok &= agree == checked;
    notes.push(format!(
        "[G:G+] prime to l on {checked} random GL2 subgroups, oracle agreement {agree}/{checked}"
    ));
    verdict(ok, notes.join("; "))
}

struct Sweeps {
    elementary_cayley: ResultRecord,
    others: Vec<ResultRecord>,
}

fn sweep(text: &str) -> ResultRecord {
    run_with_cache(&config(text), None).expect("sweep runs")
}

fn dsc_suite() -> (Verdict, Sweeps) {
    let texts = [
        "[family]\ncatalog = \"sl2-elementary\"\nell_range = [2, 31]\n",
        "[family]\ncatalog = \"gamma2-legendre\"\nell_range = [3, 31]\n",
        "[family]\ncatalog = \"sl2-elementary\"\nell_range = [2, 101]\naction = \"projective-line\"\n[solver]\npredicates = false\n",
        "[family]\ncatalog = \"gamma2-legendre\"\nell_range = [3, 101]\naction = \"projective-line\"\n[solver]\npredicates = false\n",
        "[family]\ncatalog = \"product-sl2-diagonal-test\"\nell_range = [3, 13]\naction = \"diagonal-quotient\"\n[solver]\npredicates = false\n",
    ];
    let mut records: Vec<ResultRecord> = texts.par_iter().map(|t| sweep(t)).collect();
    let mut graphs = 0;
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for rec in &records {
        for (ell, m) in members(rec) {
            let lam = m.lambda1().unwrap_or_else(|| panic!("ℓ = {ell}: no λ₁"));
            let d = m
                .diameter
                .and_then(|d| d.upper())
                .expect("diameter computed");
            let product = lam * m.degree as f64 * (d * d) as f64;
            worst = worst.min(product);
            ok &= product >= 1.0 && m.dsc.map(|x| x.pass) == Some(true);
            graphs += 1;
        }
    }
    let v = verdict(
        ok,
        format!("{graphs} graphs, min λ₁·|S|·diam² = {worst:.3} (must be ≥ 1)"),
    );
    let elementary_cayley = records.remove(0);
    (
        v,
        Sweeps {
            elementary_cayley,
            others: records,
        },
    )
}

fn interlacing() -> Verdict {
    let texts = [
        ("sl2-elementary", "projective-line"),
        ("sl2-elementary", "nonzero-vectors"),
        ("gamma2-legendre", "projective-line"),
        ("gamma2-legendre", "nonzero-vectors"),
    ]
    .map(|(cat, action)| {
        format!(
            "[family]\ncatalog = \"{cat}\"\nells = [3, 5, 7, 11, 13]\naction = \"{action}\"\n[solver]\ninterlacing = true\npredicates = false\ndiameter = false\n"
        )
    });
    let records: Vec<ResultRecord> = texts.par_iter().map(|t| sweep(t)).collect();
    let mut ok = INTERLACING_TOL == INTERLACE_TOL;
    let mut checks = 0;
    let mut min_gap = f64::INFINITY;
    for rec in &records {
        for (_, m) in members(rec) {
            let i = m.interlacing.expect("interlacing computed");
            ok &= i.pass && i.quotient_lambda1 >= i.parent_lambda1 - INTERLACE_TOL;
            min_gap = min_gap.min(i.quotient_lambda1 - i.parent_lambda1);
            checks += 1;
        }
    }
    verdict(
        ok,
        format!("{checks} quotient/parent pairs, min λ₁(quotient) − λ₁(Cayley) = {min_gap:.3e} (tol {INTERLACE_TOL:e})"),
    )
}

fn genus_of_graph(g: &esperanto::graph::RegularMultigraph) -> u64 {
    genus_from_monodromy(&CoverDescriptor::from_graph(g).unwrap())
        .unwrap()
        .genus
}

fn riemann_hurwitz() -> Verdict {
    let mut notes = Vec::new();
    let s0 = Permutation::from_cycles(3, &[&[0, 1]]).unwrap();
    let s1 = Permutation::from_cycles(3, &[&[1, 2]]).unwrap();
    let sinf = Permutation::from_cycles(3, &[&[0, 2, 1]]).unwrap();
    let s3 = genus_from_monodromy(&CoverDescriptor::new(0, vec![s0, s1, sinf], vec![]).unwrap())
        .unwrap()
        .genus;
    let mut ok = s3 == 0;
    notes.push(format!("S3 genus {s3}"));

    let id = Permutation::identity(1);
    let identity_ok = (0..4u32).all(|g0| {
        let cd = CoverDescriptor::new(
            g0,
            vec![id.clone(); 3],
            vec![(id.clone(), id.clone()); g0 as usize],
        );
        genus_from_monodromy(&cd.unwrap()).unwrap().genus == g0 as u64
    });
    ok &= identity_ok;
    notes.push(format!("identity cover keeps base genus: {identity_ok}"));

    let mut genera = Vec::new();
    for p in [3u32, 5, 7] {
        let gens = catalog_generators(&Catalog::Gamma2Legendre, p).unwrap();
        let cayley = cayley_graph(&gens, DEFAULT_CAP).unwrap();
        let g = genus_of_graph(&cayley);
        if p <= 5 {
            let oracle = legendre_genus_oracle(p);
            ok &= g == oracle;
            notes.push(format!("l={p}: {g} (oracle {oracle})"));
        } else {
            notes.push(format!("l={p}: {g}"));
        }
        let line = genus_of_graph(
            &schreier_graph(&gens, &GroupAction::ProjectiveLine, None, DEFAULT_CAP).unwrap(),
        );
        let vectors = genus_of_graph(
            &schreier_graph(&gens, &GroupAction::NonzeroVectors, None, DEFAULT_CAP).unwrap(),
        );
        ok &= line <= vectors && vectors <= g;
        genera.push(g);
    }
    let increasing = genera.windows(2).all(|w| w[0] < w[1]);
    ok &= increasing;
    notes.push(format!(
        "strictly increasing {increasing}; P1 ≤ vectors ≤ Cayley refinements hold"
    ));
    verdict(ok, notes.join(", "))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn certificates() -> Verdict {
    let mut ok = REPLAY_TOLERANCE == REPLAY_TOL;
    let mut worst: f64 = 0.0;
    let mut count = 0;

    let mut check = |inputs: ChainInputs| -> bool {
        let cert = gonality_chain(inputs.clone()).unwrap();
        let r = cert.replay();
        let g1 = inputs.genus.saturating_sub(1) as f64;
        let manual = (g1 * inputs.graph_lambda1) * (inputs.burger_constant * 2.0);
        let mut err = relative(cert.gonality_lower, manual).max(r.max_relative_error);
        if let (Some(q), Some(n), Some((c, a))) = (cert.quantitative, inputs.n, inputs.fit) {
            let n = n as f64;
            err = err.max(relative(q, c * n * (-2.0 * a * (2.0 * n).ln().ln()).exp()));
        }
        worst = worst.max(err);
        count += 1;
        r.pass && err <= REPLAY_TOL && cert.gonality_lower >= 0.0
    };

    for p in [3u32, 5, 7] {
        let gens = catalog_generators(&Catalog::Gamma2Legendre, p).unwrap();
        let g = cayley_graph(&gens, DEFAULT_CAP).unwrap();
        let lam = lambda1_dense(&g).unwrap().lambda1;
        let rh = genus_from_monodromy(&CoverDescriptor::from_graph(&g).unwrap()).unwrap();
        ok &= check(ChainInputs {
            graph_lambda1: lam,
            burger_constant: 1.0,
            genus: rh.genus,
            n: Some(g.n() as u64),
            chi_open: Some(rh.chi_open),
            fit: Some((1.0, 1.0)),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let n = rng.random_range(1..10_000_000u64);
        ok &= check(ChainInputs {
            graph_lambda1: rng.random_range(1e-6..8.0),
            burger_constant: rng.random_range(1e-3..10.0),
            genus: rng.random_range(0..1_000_000),
            n: Some(n),
            chi_open: Some(-(n as i64)),
            fit: Some((rng.random_range(1e-3..10.0), rng.random_range(0.0..6.0))),
        });
    }
    // 100 / ln(2000)^2, evaluated independently
    let golden = quantitative_gonality(1000, 0.1, 1.0).unwrap();
    ok &= relative(golden, 1.7308908465045338) <= REPLAY_TOL;
    verdict(
        ok,
        format!("{count} certificates, max relative replay error {worst:.1e} (tol {REPLAY_TOL:e})"),
    )
}

fn synthetic(ns: &[usize], lam: impl Fn(usize) -> f64) -> FamilyRecord {
    FamilyRecord {
        family: "synthetic".into(),
        members: ns
            .iter()
            .enumerate()
            .map(|(i, &n)| FamilyMember {
                index: i as u64,
                n,
                lambda1: lam(n),
                diameter: None,
                genus: None,
            })
            .collect(),
    }
}

fn fits(sweeps: &Sweeps) -> Verdict {
    let grid = default_exponent_grid();
    let step = grid[1] - grid[0];
    let ns = [16usize, 128, 1024, 8192, 65536, 524288];
    let log_fit = esperantist_fit(&synthetic(&ns, |n| 1.0 / (2.0 * n as f64).ln()), &grid).unwrap();
    let const_fit = esperantist_fit(&synthetic(&ns, |_| 0.37), &grid).unwrap();
    let mut ok = (log_fit.exponent - 1.0).abs() <= step / 2.0
        && (log_fit.c - 1.0).abs() <= 1e-9
        && const_fit.exponent == 0.0
        && (const_fit.c - 0.37).abs() <= 1e-15;

    let rec = &sweeps.elementary_cayley;
    let fit = rec.body.fit.as_ref().expect("SL2 Cayley fit present");
    ok &= fit.c > 0.0
        && fit
            .rows
            .iter()
            .all(|r| r.witnesses.len() == rec.body.members.len());
    let expander = fit
        .expander_row
        .witnesses
        .iter()
        .map(|w| format!("{w:.3}"))
        .collect::<Vec<_>>();
    let other_fits = sweeps
        .others
        .iter()
        .filter_map(|r| {
            r.body
                .fit
                .as_ref()
                .map(|f| format!("{}: A={} c={:.3}", r.body.family, f.exponent, f.c))
        })
        .collect::<Vec<_>>();
    verdict(
        ok,
        format!(
            "1/ln2n → A={} c={:.12}; constant → A={}; SL2 Cayley l≤31 → A={} c={:.4} trend {} (A=0 witnesses [{}]); {}",
            log_fit.exponent,
            log_fit.c,
            const_fit.exponent,
            fit.exponent,
            fit.c,
            fit.trend_holds,
            expander.join(", "),
            other_fits.join("; ")
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("[family]\ncatalog = \"sl2-elementary\"\nells = [7, 11, 13]\n");
    let cache = Cache::new(dir.path().join("a"));

    let t = Instant::now();
    let cold = run_with_cache(&cfg, Some(&cache)).unwrap();
    let cold_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let warm = run_with_cache(&cfg, Some(&cache)).unwrap();
    let warm_s = t.elapsed().as_secs_f64();
    let fresh = run_with_cache(&cfg, Some(&Cache::new(dir.path().join("b")))).unwrap();

    let identical = cold.body_json() == warm.body_json() && cold.body_json() == fresh.body_json();
    let all_hits = warm.cache_hits() == warm.body.members.len() && cold.cache_hits() == 0;
    let speedup = cold_s / warm_s.max(1e-9);
    verdict(
        identical && all_hits && speedup > CACHE_SPEEDUP,
        format!(
            "bodies byte-identical {identical}, warm hits {}/{}, cold {cold_s:.2}s warm {warm_s:.4}s speedup {speedup:.0}× (need > {CACHE_SPEEDUP}×)",
            warm.cache_hits(),
            warm.body.members.len()
        ),
    )
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            verdict(false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Verdict, f64)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = guarded(AssertUnwindSafe(f));
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} criterion {id} {name}: {} [{secs:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((id, name, v, secs));
    };

    run(1, "closed-form spectra", &mut closed_form_spectra);
    run(2, "group orders", &mut group_orders);
    run(3, "order-l and perfectness predicates", &mut predicates);
    let mut sweeps = None;
    run(4, "Diaconis-Saloff-Coste", &mut || {
        let (v, s) = dsc_suite();
        sweeps = Some(s);
        v
    });
    run(5, "interlacing", &mut interlacing);
    run(6, "Riemann-Hurwitz", &mut riemann_hurwitz);
    run(7, "certificate integrity", &mut certificates);
    run(8, "esperantist fits", &mut || match &sweeps {
        Some(s) => fits(s),
        None => verdict(false, "criterion 4 sweep unavailable"),
    });
    run(9, "pipeline determinism and caching", &mut determinism);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
