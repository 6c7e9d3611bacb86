//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use pathsig::causality::{
    cross_correlation, shuffle_null_many, InfluenceStatistic, LagRange, NullModelSpec, SlidingAreaStatistic,
    WindowSpec,
};
use pathsig::dynamics::{cyclic_pair, default_events, lorenz, three_channel_event_series, LorenzParams};
use pathsig::leadlag::{family_area, lead_matrix, signed_area, signed_area_via_winding, FamilyGrid, GridSpec};
use pathsig::path::{preprocess, PreprocessConfig, Warp};
use pathsig::signature::{scale_path_signature_check, signature, signature_oracle};
use pathsig::tensor::{shuffle, TruncatedTensor, Word};
use pathsig::Path;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn random_path(rng: &mut ChaCha8Rng, points: usize, n: usize) -> Path {
    let rows: Vec<Vec<f64>> = (0..points)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let times = (0..points).map(|k| k as f64).collect();
    Path::new(times, rows, vec![]).unwrap()
}

/// Coordinates on the grid `k / 256` so sums with small integers are exact.
fn dyadic_path(rng: &mut ChaCha8Rng, points: usize, n: usize) -> Path {
    let rows: Vec<Vec<f64>> = (0..points)
        .map(|_| (0..n).map(|_| rng.random_range(-1024i32..=1024) as f64 / 256.0).collect())
        .collect();
    Path::new((0..points).map(|k| k as f64).collect(), rows, vec![]).unwrap()
}

fn all_words(n: usize, max_len: usize) -> Vec<Word> {
    (1..=max_len)
        .flat_map(|len| (0..n.pow(len as u32)).map(move |idx| Word::from_index(idx, n, len)))
        .collect()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let words = all_words(3, 3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = random_path(&mut rng, 6, 3);
        let s = signature(&p, 3).map_err(|e| e.to_string())?;
        for w in &words {
            let o = signature_oracle(&p, w).map_err(|e| e.to_string())?;
            worst = worst.max((o - s.coeff(w).unwrap()).abs());
        }
    }
    let took = start.elapsed();
    ensure(
        worst < 1e-10 && took < Duration::from_secs(10),
        format!("max error {worst:.3e} over 50 paths x {} words in {took:.2?}", words.len()),
    )
}

fn shuffle_identity() -> Outcome {
    let expected: Vec<Word> = [[1, 2, 2, 3], [1, 2, 2, 3], [2, 1, 2, 3], [1, 2, 3, 2], [2, 1, 3, 2], [2, 3, 1, 2]]
        .into_iter()
        .map(Word::from)
        .collect();
    let got = shuffle(&Word::from([1, 2]), &Word::from([2, 3]));
    if got.words() != expected.as_slice() {
        return Err(format!("(1,2) shuffle (2,3) gave {:?}", got.words()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let words = all_words(3, 2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = random_path(&mut rng, 8, 3);
        let s = signature(&p, 4).map_err(|e| e.to_string())?;
        for i in &words {
            for j in &words {
                let lhs = s.coeff(i).unwrap() * s.coeff(j).unwrap();
                let rhs: f64 = shuffle(i, j).iter().map(|k| s.coeff(k).unwrap()).sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    ensure(worst < 1e-10, format!("12 shuffle 23 multiset exact; max error {worst:.3e} over 100 paths"))
}

fn chen_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = random_path(&mut rng, 6, 3);
        let b = random_path(&mut rng, 5, 3);
        let joined = signature(&a.concat(&b).unwrap(), 4).unwrap().tensor;
        let product = signature(&a, 4)
            .unwrap()
            .tensor
            .tensor_product(&signature(&b, 4).unwrap().tensor)
            .unwrap();
        worst = worst.max(joined.max_abs_diff(&product).unwrap());
    }
    ensure(worst < 1e-10, format!("max error {worst:.3e} over 100 pairs at level 4"))
}

fn invariances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let warps = [
        Warp::Power(2.5),
        Warp::Sine { amplitude: 0.9, cycles: 3.0 },
        Warp::Knots(vec![(0.2, 0.6), (0.5, 0.7)]),
        Warp::Affine { scale: 3.0, offset: -7.0 },
    ];
    let mut translation_exact = true;
    let mut reparam = 0.0f64;
    let mut scaling = 0.0f64;
    for _ in 0..20 {
        let p = dyadic_path(&mut rng, 9, 3);
        let base = signature(&p, 4).unwrap().tensor;
        let c: Vec<f64> = (0..3).map(|_| rng.random_range(-8i32..=8) as f64).collect();
        let moved = signature(&p.translate(&c).unwrap(), 4).unwrap().tensor;
        translation_exact &= moved == base;
        for w in &warps {
            let r = signature(&p.reparametrize(w).unwrap(), 4).unwrap().tensor;
            reparam = reparam.max(r.max_abs_diff(&base).unwrap());
        }
        for lambda in [-2.0, 0.5, 3.0] {
            let check = scale_path_signature_check(&p, lambda, 4).unwrap();
            scaling = check.max_deviation.iter().copied().fold(scaling, f64::max);
        }
    }
    ensure(
        translation_exact && reparam < 1e-12 && scaling < 1e-10,
        format!(
            "translation bit-exact: {translation_exact}; reparametrization {reparam:.3e}; scaling {scaling:.3e}"
        ),
    )
}

fn tree_like() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut longest = 0;
    for _ in 0..50 {
        let p = random_path(&mut rng, 7, 3);
        let loop_back = p.concat(&p.inverse()).unwrap();
        let s = signature(&loop_back, 4).unwrap().tensor;
        worst = worst.max(s.max_abs_diff(&TruncatedTensor::unit(3, 4)).unwrap());
        longest = longest.max(loop_back.reduce().len());
    }
    ensure(
        worst < 1e-10 && longest == 1,
        format!("max deviation from unit {worst:.3e}; longest reduction {longest} point(s)"),
    )
}

fn polygon(rng: &mut ChaCha8Rng, vertices: usize) -> Path {
    let mut rows: Vec<Vec<f64>> = (0..vertices)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    rows.push(rows[0].clone());
    Path::new((0..=vertices).map(|k| k as f64).collect(), rows, vec![]).unwrap()
}

fn circle(samples: usize) -> Path {
    let rows = (0..=samples)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / samples as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    Path::new((0..=samples).map(|k| k as f64 / samples as f64).collect(), rows, vec![]).unwrap()
}

fn winding_area() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ratio = 0.0f64;
    for k in 0..20 {
        let p = polygon(&mut rng, 5 + k % 7);
        let exact = signed_area(&p, 0, 1).unwrap();
        let w = signed_area_via_winding(&p, 0, 1, GridSpec::square(200)).unwrap();
        worst_ratio = worst_ratio.max((w.area - exact).abs() / w.error_bound());
    }
    let c = circle(1000);
    let via_sig = signed_area(&c, 0, 1).unwrap();
    let via_grid = signed_area_via_winding(&c, 0, 1, GridSpec::square(200)).unwrap().area;
    ensure(
        worst_ratio <= 1.0 && (via_sig - PI).abs() < 1e-3 && (via_grid - PI).abs() < 2e-2,
        format!(
            "worst |grid - exact| / bound {worst_ratio:.3}; circle {via_sig:.6} (signature), {via_grid:.6} (grid)"
        ),
    )
}

fn lead_matrix_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut skew = 0.0f64;
    for _ in 0..20 {
        let m = lead_matrix(&random_path(&mut rng, 50, 5));
        for i in 0..5 {
            for j in 0..5 {
                skew = skew.max((m.get(i, j) + m.get(j, i)).abs());
            }
        }
    }
    let c = lead_matrix(&circle(1000));
    let (a, b) = (c.get(0, 1), c.get(1, 0));
    ensure(
        skew < 1e-12 && (a - PI).abs() < 1e-3 && (b + PI).abs() < 1e-3,
        format!("skew residual {skew:.3e}; circle entries {a:.6}, {b:.6}"),
    )
}

fn warp_contrast() -> Outcome {
    let plain = cyclic_pair(4, 0.25, &Warp::Identity, 2000, 0.0, 0).unwrap();
    let warped = cyclic_pair(4, 0.25, &Warp::Power(1.8), 2000, 0.0, 0).unwrap();
    let da = (signed_area(&plain, 0, 1).unwrap() - signed_area(&warped, 0, 1).unwrap()).abs();
    let lags = LagRange::symmetric(0.25);
    let xa = cross_correlation(&plain, (0, 1), lags).unwrap();
    let xb = cross_correlation(&warped, (0, 1), lags).unwrap();
    let sup = xa.values.iter().zip(&xb.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(
        da < 1e-3 && sup > 1e-2,
        format!("area difference {da:.3e}; cross-correlation sup difference {sup:.3e}"),
    )
}

fn event_pipeline() -> Outcome {
    let start = Instant::now();
    let raw = three_channel_event_series(&default_events(), 2001, 0.1, 7).unwrap();
    let window = WindowSpec::new(0.1, 0.005).unwrap();
    let stats: Vec<SlidingAreaStatistic> = [(0, 1), (1, 2), (0, 2)]
        .into_iter()
        .map(|pair| SlidingAreaStatistic {
            pair,
            window,
            preprocess: PreprocessConfig::smoothing(0.001),
        })
        .collect();
    let spec = NullModelSpec::new(1000, 42);
    let r = shuffle_null_many(&raw, &stats, &spec).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let pos12 = r[0].positive_runs().count();
    let neg23 = r[1].negative_runs().count();
    let any13 = r[2].runs.len();
    let min_len = r[0].runs.iter().chain(&r[1].runs).map(|x| x.len).min().unwrap_or(0);
    ensure(
        pos12 >= 1 && neg23 >= 1 && any13 == 0 && min_len >= spec.min_run_length && took < Duration::from_secs(60),
        format!(
            "A12 positive runs {pos12}, A23 negative runs {neg23}, A13 runs {any13}; 1000 replicates in {took:.2?}"
        ),
    )
}

fn lorenz_pipeline() -> Outcome {
    let run = || -> Result<(Vec<f64>, String, usize), String> {
        let raw = lorenz(&LorenzParams {
            sample_every: 10,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let cfg = PreprocessConfig::influence();
        let prepared = preprocess(&raw, &cfg).map_err(|e| e.to_string())?.path;
        let sig = signature(&prepared, 2).map_err(|e| e.to_string())?;
        let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
        let mut errors = Vec::new();
        for &(i, j) in &pairs {
            let s = pathsig::signature::signature_derivative(&prepared, i, j).map_err(|e| e.to_string())?;
            let w = Word::from([i + 1, j + 1]);
            errors.push((s.integral() - sig.coeff(&w).unwrap()).abs());
        }
        let stats: Vec<InfluenceStatistic> = pairs
            .iter()
            .map(|&pair| InfluenceStatistic {
                pair,
                window: None,
                preprocess: cfg.clone(),
            })
            .collect();
        let reports = shuffle_null_many(&raw, &stats, &NullModelSpec::new(1000, 2024)).map_err(|e| e.to_string())?;
        let mask12 = reports[0].significant_mask.iter().filter(|&&b| b).count();
        Ok((errors, serde_json::to_string(&reports).unwrap(), mask12))
    };
    let (errors, first, mask12) = run()?;
    let (_, second, _) = run()?;
    let worst = errors.iter().copied().fold(0.0, f64::max);
    ensure(
        worst < 1e-8 && mask12 > 0 && first == second,
        format!(
            "max |integral - S^(i,j)| {worst:.3e}; (1,2) significant points {mask12}; identical reruns: {}",
            first == second
        ),
    )
}

fn family_area_check() -> Outcome {
    let identity = FamilyGrid::sample(100, 100, 2, |s, t| vec![s, t]).unwrap();
    let square = FamilyGrid::sample(100, 100, 2, |s, t| vec![s * s, t]).unwrap();
    let a = family_area(&identity, 0, 1).unwrap();
    let b = family_area(&square, 0, 1).unwrap();
    ensure(a == 1.0 && (b - 1.0).abs() < 1e-3, format!("(s,t) -> {a}; (s^2,t) -> {b:.9}"))
}

fn cli_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_pathsig");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let run = |args: &[&str], threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(exe)
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        Ok(out.stdout)
    };
    let events = file("events.csv");
    let lz = file("lorenz.csv");
    let cyc = file("cyclic.csv");
    let setup: [(&[&str], &String); 3] = [
        (&["gen", "events", "--seed", "7"], &events),
        (&["gen", "lorenz", "--steps", "4000", "--sample-every", "10"], &lz),
        (&["gen", "cyclic", "--warp", "power:1.5", "--noise", "0.01", "--seed", "3"], &cyc),
    ];
    for (args, path) in setup {
        std::fs::write(path, run(args, "1")?).map_err(|e| e.to_string())?;
    }
    let commands: Vec<Vec<&str>> = vec![
        vec!["gen", "events", "--seed", "7"],
        vec!["gen", "lorenz", "--steps", "500"],
        vec!["gen", "cyclic", "--noise", "0.05", "--seed", "9"],
        vec!["sig", "-i", &lz, "--level", "3"],
        vec!["logsig", "-i", &lz, "--level", "3"],
        vec!["leadmatrix", "-i", &events],
        vec!["slidearea", "-i", &events, "--window", "0.1", "--stride", "0.01", "--smooth-sigma", "0.001", "--replicates", "200", "--seed", "42"],
        vec!["slidearea", "-i", &cyc, "--window", "0.25", "--replicates", "100", "--seed", "1", "--band", "quantile", "--format", "csv"],
        vec!["influence", "-i", &lz, "--replicates", "200", "--seed", "5", "--pairs", "1:2,x:z"],
        vec!["influence", "-i", &lz, "--window", "2", "--replicates", "100", "--seed", "5", "--format", "csv"],
        vec!["xcorr", "-i", &cyc, "--lags", "0.2"],
        vec!["granger", "-i", &lz, "--order", "2"],
    ];
    let mut checked = 0;
    for args in &commands {
        let a = run(args, "1")?;
        let b = run(args, "1")?;
        let c = run(args, "4")?;
        if a != b || a != c || a.is_empty() {
            return Err(format!("output of {args:?} differs between runs or thread counts"));
        }
        checked += 1;
    }
    ensure(true, format!("{checked} commands byte-identical across reruns and 1/4 threads"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("oracle equivalence", oracle_equivalence),
        ("shuffle identity", shuffle_identity),
        ("Chen identity", chen_identity),
        ("invariances", invariances),
        ("tree-like triviality", tree_like),
        ("signed area = winding integral", winding_area),
        ("lead matrix", lead_matrix_check),
        ("reparametrization contrast", warp_contrast),
        ("event pipeline", event_pipeline),
        ("Lorenz pipeline", lorenz_pipeline),
        ("family area", family_area_check),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
