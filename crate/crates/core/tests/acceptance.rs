//! One PASS/FAIL line per acceptance criterion, with timings.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ngstate::coherence::{overlap_centered, CoherencePair, WignerWidths};
use ngstate::densmat::{
    classify_regime, d_surface, default_u_max, ln_d, peak_fit, peak_threshold, u_c_sq, Regime,
};
use ngstate::figures::Preset;
use ngstate::grid::Axis;
use ngstate::observables::{
    c4_large_n_limit, c4_ratio_nx, c4_small_n_limit, entropy_per_dof, purity, purity_limit_large_n,
    purity_ratio_nx,
};
use ngstate::oracle::{
    c4_sum, entropy_by_definition, purity_by_definition, trace_g_closed, trace_g_sum,
    MatsubaraTruncation,
};
use ngstate::specfun::big_f;
use ngstate::statemap::{params_from_moments, GaussianMoments, ReducedState};
use ngstate::wigner::{
    gaussian_ln_w, ln_w, quadratic_fit, wigner_grid, WignerSettings, WignerSlice,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn st(n: f64, x: f64) -> ReducedState {
    ReducedState::new(n, x).unwrap()
}

fn c1() -> Outcome {
    let xs = Axis::new(0.0, 20.0, 2001).unwrap().values();
    let mut dev_large: f64 = 0.0;
    let mut dev_small: f64 = 0.0;
    for &x in xs.iter().skip(1) {
        let l = c4_large_n_limit(x);
        dev_large = dev_large.max((c4_ratio_nx(10.0, x).unwrap() - l).abs() / l.abs());
        let s = c4_small_n_limit(x);
        dev_small = dev_small.max((c4_ratio_nx(1e-6, x).unwrap() - s).abs() / s.abs());
    }
    let mut bounded = true;
    for n in [0.0, 1e-6, 0.1, 1.0, 10.0, 100.0] {
        for &x in &xs {
            let c = c4_ratio_nx(n, x).unwrap();
            bounded &= (-1.0..=0.0).contains(&c);
        }
    }
    outcome(
        dev_large < 0.02 && dev_small < 1e-3 && bounded,
        format!("n=10 vs large-n max rel dev {dev_large:.2e}; n=1e-6 vs small-n {dev_small:.2e}; bounds hold {bounded}"),
    )
}

fn c2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (x, shown) in [(0.5, 0.5), (1.0, 0.67), (15.0, 0.96)] {
        let limit = c4_large_n_limit(x).abs();
        let full = c4_ratio_nx(10.0, x).unwrap().abs();
        // one unit of the last displayed digit
        pass &= (limit - shown).abs() < 0.01 && (full - shown).abs() < 0.01;
        parts.push(format!(
            "x={x}: limit {limit:.4}, full {full:.4}, quoted {shown}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c3() -> Outcome {
    let mut exact = true;
    for n in [0.0, 0.1, 0.5, 1.0, 10.0, 100.0] {
        let p0 = 1.0 / (2.0 * n + 1.0);
        if n > 0.0 {
            exact &= (purity(&st(n, 0.0)).unwrap().p - p0).abs() <= 1e-14 * p0;
        }
        exact &= purity_ratio_nx(n, 0.0).unwrap() == 1.0;
    }
    let xs = Axis::new(0.0, 100.0, 1001).unwrap().values();
    let ratios: Vec<f64> = xs
        .iter()
        .map(|&x| purity_ratio_nx(10.0, x).unwrap())
        .collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let in_band = lo > 0.857 && hi <= 1.0;
    let mut large_n: f64 = 0.0;
    for &x in xs.iter().skip(1) {
        let limit = purity_limit_large_n(x).unwrap().1;
        large_n = large_n.max((purity_ratio_nx(100.0, x).unwrap() - limit).abs() / limit);
    }
    let mut oracle: f64 = 0.0;
    for n in [0.1, 1.0, 10.0] {
        for x in [0.0, 0.5, 1.0, 5.0, 15.0] {
            let p = params_from_moments(&GaussianMoments::thermal(n).unwrap(), x).unwrap();
            let def = purity_by_definition(&p).unwrap();
            let closed = purity(&st(n, x)).unwrap().p;
            oracle = oracle.max((def - closed).abs() / closed);
        }
    }
    outcome(
        exact && in_band && large_n < 0.01 && oracle < 1e-10,
        format!(
            "p(n,0)=1/(2n+1) {exact}; n=10 ratio in [{lo:.4}, {hi:.4}]; n=100 vs large-n {large_n:.2e}; definition vs closed {oracle:.2e}"
        ),
    )
}

fn c4() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [0.1, 1.0, 10.0] {
        for x in [0.0, 0.5, 1.0, 5.0, 15.0] {
            worst = worst.max(
                (entropy_by_definition(&st(n, x)).unwrap() - entropy_per_dof(n).unwrap()).abs(),
            );
        }
    }
    outcome(worst < 1e-8, format!("max |S_def - S(n)| = {worst:.2e}"))
}

fn c5() -> Outcome {
    let trunc = MatsubaraTruncation::default();
    let mut trace: f64 = 0.0;
    for z in [0.05, 0.3, 2f64.ln(), 1.0, 3.0, 10.0] {
        let c = trace_g_closed(z);
        trace = trace.max((trace_g_sum(z * z, trunc).unwrap() - c).abs() / c);
    }
    let mut c4: f64 = 0.0;
    for n in [0.1, 1.0, 10.0] {
        for x in [0.5, 1.0, 5.0, 15.0] {
            let s = st(n, x);
            let closed = c4_ratio_nx(n, x).unwrap();
            c4 = c4.max((c4_sum(&s, trunc) - closed).abs() / closed.abs());
        }
    }
    outcome(
        trace < 1e-8 && c4 < 1e-8,
        format!("n_max=1e6 with tail: trace sum rel err {trace:.2e}, C4 sum rel err {c4:.2e}"),
    )
}

fn c6() -> Outcome {
    let s = st(10.0, 15.0);
    let u = Axis::new(0.0, default_u_max(&s), 201).unwrap();
    let v = Axis::new(0.0, 3.0, 201).unwrap();
    let surf = d_surface(&s, u, v).unwrap();
    let uc = u_c_sq(&s, 0.0).unwrap().unwrap().sqrt();
    let at_ridge = surf.argmax.1 == 0 && (u.value(surf.argmax.0) - uc).abs() <= u.step();
    let mut monotone = true;
    for i in 0..u.count {
        for j in 1..v.count {
            monotone &= surf.at(i, j) < surf.at(i, j - 1);
        }
    }
    let t = peak_threshold(&s);
    let flips = classify_regime(&st(10.0, t - 1e-6)) == Regime::Monotone
        && classify_regime(&st(10.0, t + 1e-6)) == Regime::Peaked;
    let mut worst: f64 = 0.0;
    for (n, x) in [(10.0, 15.0), (1.0, 0.5), (0.3, 5.0)] {
        let s = st(n, x);
        for (u_sq, v_sq) in [(3.0, 0.2), (50.0, 1.0), (200.0, 0.5)] {
            let h = 1e-4;
            let du = (ln_d(&s, u_sq + h, v_sq).unwrap().0 - ln_d(&s, u_sq - h, v_sq).unwrap().0)
                / (2.0 * h);
            let dv = (ln_d(&s, u_sq, v_sq + h).unwrap().0 - ln_d(&s, u_sq, v_sq - h).unwrap().0)
                / (2.0 * h);
            let b = big_f(ln_d(&s, u_sq, v_sq).unwrap().1.s).unwrap();
            worst = worst.max((du + b.fu).abs()).max((dv + b.fv).abs());
        }
    }
    outcome(
        at_ridge && monotone && flips && worst < 1e-6,
        format!(
            "argmax (u={:.3}, v={}) vs u_c={uc:.3} (step {:.3}); slices monotone {monotone}; flip at x={t:.6} {flips}; derivative identities max err {worst:.1e}",
            u.value(surf.argmax.0),
            v.value(surf.argmax.1),
            u.step()
        ),
    )
}

fn c7() -> Outcome {
    let s = st(10.0, 1000.0);
    let fit = peak_fit(&s).unwrap();
    let peak = ln_d(&s, fit.u0 * fit.u0, 0.0).unwrap().0;
    let mut resid: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let du = fit.delta_u_sq.sqrt();
    for i in -4..=4 {
        for j in 0..=4 {
            let u = fit.u0 + du * i as f64 / 4.0;
            let v = fit.delta_v_sq.sqrt() * j as f64 / 4.0;
            let exact = ln_d(&s, u * u, v * v).unwrap().0;
            let gauss = peak
                - (u - fit.u0).powi(2) / (2.0 * fit.delta_u_sq)
                - v * v / (2.0 * fit.delta_v_sq);
            resid = resid.max((exact - gauss).abs());
            scale = scale.max(exact.abs());
        }
    }
    let rel = resid / scale;
    let mut fd_worst: f64 = 0.0;
    for (n, x) in [(10.0, 15.0), (10.0, 1000.0), (3.0, 50.0)] {
        let s = st(n, x);
        let fit = peak_fit(&s).unwrap();
        let h = 1e-3 * fit.delta_u_sq.sqrt();
        let f = |u: f64| ln_d(&s, u * u, 0.0).unwrap().0;
        let second = (f(fit.u0 + h) - 2.0 * f(fit.u0) + f(fit.u0 - h)) / (h * h);
        fd_worst = fd_worst.max((-1.0 / second - fit.delta_u_sq).abs() / fit.delta_u_sq);
    }
    outcome(
        rel < 0.01 && fit.delta_v_sq == 0.5 && fd_worst < 5e-3,
        format!("residual within one width {rel:.2e} of |ln d|; delta_v^2 = {}; delta_u^2 vs FD curvature {fd_worst:.2e}", fit.delta_v_sq),
    )
}

fn c8() -> Outcome {
    let settings = WignerSettings::default();

    let mut gauss: f64 = 0.0;
    let g = st(10.0, 0.0);
    for u_sq in [0.0, 30.0, 200.0] {
        let slice = WignerSlice::new(&g, u_sq, &settings, 3.5).unwrap();
        for r in [0.0, 1.0, 2.0, 3.0, 3.5] {
            let w = slice
                .ln_w(r * r, settings.extrapolation, settings.tol)
                .unwrap();
            gauss = gauss.max((w.value - gaussian_ln_w(&g, u_sq, r * r).unwrap()).abs());
        }
    }

    let s = st(10.0, 15.0);
    let u0 = peak_fit(&s).unwrap().u0;
    let slice = WignerSlice::new(&s, u0 * u0, &settings, 1.0).unwrap();
    let seq: Vec<f64> = [12, 16, 20, 24]
        .iter()
        .map(|&n| slice.ln_w_at_n(0.0, n).unwrap().ln_w)
        .collect();
    let plateau = seq.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - seq.iter().cloned().fold(f64::INFINITY, f64::min);

    let s = st(10.0, 1000.0);
    let u0 = peak_fit(&s).unwrap().u0;
    let slice = WignerSlice::new(&s, u0 * u0, &settings, 2.0).unwrap();
    let r2: Vec<f64> = (0..9).map(|i| (0.25 * i as f64).powi(2)).collect();
    let y: Vec<f64> = r2
        .iter()
        .map(|&q| {
            slice
                .ln_w(q, settings.extrapolation, settings.tol)
                .unwrap()
                .value
        })
        .collect();
    let delta_r_sq = -1.0 / (2.0 * quadratic_fit(&r2, &y)[1]);

    let (n, x) = (100.0, 1e6);
    let m = GaussianMoments::thermal(n).unwrap();
    let a = params_from_moments(&m, x).unwrap().a;
    let s = st(n, x);
    let phi0 = peak_fit(&s).unwrap().u0 * a.sqrt();
    let target_phi = m.f / (12.0 * n * n);
    let h = 0.1 * target_phi.sqrt();
    let dphi: Vec<f64> = (-4..=4).map(|i| h * i as f64).collect();
    let yphi: Vec<f64> = dphi
        .iter()
        .map(|d| {
            let p = phi0 + d;
            ln_w(&s, p * p / a, 0.0, &settings).unwrap().value
        })
        .collect();
    let width_phi = -1.0 / (2.0 * quadratic_fit(&dphi, &yphi)[2]);
    let slice = WignerSlice::new(&s, phi0 * phi0 / a, &settings, 2.0).unwrap();
    let pi2: Vec<f64> = (0..9)
        .map(|i| (0.25 * i as f64 / (2.0 * a.sqrt())).powi(2))
        .collect();
    let ypi: Vec<f64> = pi2
        .iter()
        .map(|&q| {
            slice
                .ln_w(4.0 * a * q, settings.extrapolation, settings.tol)
                .unwrap()
                .value
        })
        .collect();
    let width_pi = -1.0 / (2.0 * quadratic_fit(&pi2, &ypi)[1]);
    let dev_phi = (width_phi - target_phi).abs() / target_phi;
    let dev_pi = (width_pi - m.k).abs() / m.k;

    let s = st(10.0, 15.0);
    let start = Instant::now();
    let grid = wigner_grid(
        &s,
        Axis::new(0.0, default_u_max(&s), 101).unwrap(),
        Axis::new(0.0, 3.5, 101).unwrap(),
        &settings,
    )
    .unwrap();
    let grid_time = start.elapsed().as_secs_f64();
    let positive = grid.ln_w.iter().all(|v| v.is_finite());
    let max_spread = grid.spread.iter().cloned().fold(0.0, f64::max);

    let pass = gauss < 1e-6
        && plateau < 1e-3
        && (delta_r_sq - 2.0).abs() < 0.1
        && dev_phi < 0.05
        && dev_pi < 0.05
        && grid_time < 180.0
        && positive
        && grid.not_converged == 0;
    outcome(
        pass,
        format!(
            "x=0 max |ln w - Gaussian| {gauss:.1e}; plateau N=12..24 at u0 {plateau:.1e}; delta_r^2(10,1000) = {delta_r_sq:.4}; \
             (100,1e6) delta_phi^2/N = {width_phi:.4e} vs F/12n^2 = {target_phi:.4e} ({:.1}%), delta_pi^2/N = {width_pi:.2} vs K = {} ({:.1}%); \
             101x101 grid {grid_time:.1} s on {} threads, max spread {max_spread:.1e}, all finite {positive}",
            100.0 * dev_phi,
            m.k,
            100.0 * dev_pi,
            rayon::current_num_threads()
        ),
    )
}

fn c9() -> Outcome {
    let a = [0.3, -1.2, 2.0];
    let ap = [1.1, 0.4, -0.7];
    let b = [-0.5, 0.9, 0.1];
    let bp = [2.2, -0.3, 0.6];
    let pair = CoherencePair::from_vectors(&a, &ap, &b, &bp).unwrap();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let vacuum_err = (overlap_centered(&pair, &WignerWidths::vacuum())
        + (sq(&a) + sq(&ap) + sq(&b) + sq(&bp)) / 2.0)
        .abs();

    // a - a' decay follows Delta_pi only, b - b' decay follows Delta_phi only
    let rate = |w: &WignerWidths, along_real: bool| {
        let (p0, p1) = if along_real {
            (
                CoherencePair::new(1.0, 0.0, 1.0, 0.0).unwrap(),
                CoherencePair::new(1.0, 1.0, 1.0, 0.0).unwrap(),
            )
        } else {
            (
                CoherencePair::new(1.0, 0.0, 1.0, 0.0).unwrap(),
                CoherencePair::new(1.0, 0.0, 1.0, 1.0).unwrap(),
            )
        };
        overlap_centered(&p0, w) - overlap_centered(&p1, w)
    };
    let sweep = [1e-3, 1e-2, 0.1, 0.5, 2.0, 10.0];
    let mut asymmetric = true;
    for &fixed in &sweep {
        let real: Vec<f64> = sweep
            .iter()
            .map(|&d| rate(&WignerWidths::new(fixed, d).unwrap(), true))
            .collect();
        let real_flat: Vec<f64> = sweep
            .iter()
            .map(|&d| rate(&WignerWidths::new(d, fixed).unwrap(), true))
            .collect();
        let imag: Vec<f64> = sweep
            .iter()
            .map(|&d| rate(&WignerWidths::new(d, fixed).unwrap(), false))
            .collect();
        let imag_flat: Vec<f64> = sweep
            .iter()
            .map(|&d| rate(&WignerWidths::new(fixed, d).unwrap(), false))
            .collect();
        asymmetric &= real.windows(2).all(|w| w[1] > w[0]) && imag.windows(2).all(|w| w[1] > w[0]);
        let flat = |v: &[f64]| v.iter().all(|r| (r - v[0]).abs() <= 1e-12 * v[0].abs());
        asymmetric &= flat(&real_flat) && flat(&imag_flat);
    }
    let narrow = rate(&WignerWidths::new(0.5, 1e-4).unwrap(), true);
    outcome(
        vacuum_err < 1e-12 && asymmetric && narrow < 2e-4,
        format!("vacuum reduction error {vacuum_err:.1e}; rates set by the conjugate width only {asymmetric}; real-axis rate at Delta_pi^2=1e-4: {narrow:.2e}"),
    )
}

fn run_preset(exe: &str, preset: Preset, threads: u32, out: &Path) -> bool {
    let mut cmd = Command::new(exe);
    cmd.args(["figure", preset.name(), "--out"])
        .arg(out)
        .args(["--threads", &threads.to_string()]);
    match preset {
        Preset::Fig3DSurface => {
            cmd.args(["--grid", "61x41"]);
        }
        Preset::Fig5Wigner => {
            cmd.args(["--grid", "21x15"]);
        }
        Preset::Fig6Contours => {
            cmd.args(["--grid", "11x11"]);
        }
        Preset::Fig7Slice => {
            cmd.args(["--grid", "61x1"]);
        }
        _ => {}
    }
    cmd.env_remove("NGSTATE_THREADS")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_ngstate");
    let tmp = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut compared = 0;
    for preset in Preset::ALL {
        let (one, eight) = (
            tmp.path().join(format!("{preset}_1")),
            tmp.path().join(format!("{preset}_8")),
        );
        if !run_preset(exe, preset, 1, &one) || !run_preset(exe, preset, 8, &eight) {
            return outcome(false, format!("{preset} did not complete"));
        }
        let (a, b) = (data_files(&one), data_files(&eight));
        pass &= !a.is_empty() && a == b;
        compared += a.len();
    }
    outcome(pass, format!("{compared} CSV files from all 7 presets byte-identical between --threads 1 and --threads 8 (reduced grids)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("C4 curve", c1),
        ("quoted C4 values", c2),
        ("purity", c3),
        ("entropy invariance", c4),
        ("Matsubara oracles", c5),
        ("matrix-element structure", c6),
        ("peak fit", c7),
        ("Wigner pipeline", c8),
        ("coherence", c9),
        ("determinism", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} criterion {} ({name}): {} [{secs:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
