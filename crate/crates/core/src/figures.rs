//! Figure presets: each writes deterministic data files plus a JSON metadata file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::densmat::{d_surface, default_u_max, ln_d};
use crate::error::{Error, Result};
use crate::grid::{csv_string, Axis};
use crate::observables::{
    c4_large_n_limit, c4_ratio_nx, c4_small_n_limit, purity_limit_large_n, purity_ratio_nx,
};
use crate::statemap::{kappa, x_from_c4, ReducedState};
use crate::wigner::{
    default_projection_axes, project_physical, wigner_grid, Mode, SqueezeParams, WignerSettings,
    WignerSlice,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preset {
    Fig1C4,
    Fig2Purity,
    Fig3DSurface,
    Fig4DSlices,
    Fig5Wigner,
    Fig6Contours,
    Fig7Slice,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig1C4,
        Preset::Fig2Purity,
        Preset::Fig3DSurface,
        Preset::Fig4DSlices,
        Preset::Fig5Wigner,
        Preset::Fig6Contours,
        Preset::Fig7Slice,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1C4 => "fig1_c4",
            Preset::Fig2Purity => "fig2_purity",
            Preset::Fig3DSurface => "fig3_dsurface",
            Preset::Fig4DSlices => "fig4_dslices",
            Preset::Fig5Wigner => "fig5_wigner",
            Preset::Fig6Contours => "fig6_contours",
            Preset::Fig7Slice => "fig7_slice",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidConfig(format!("unknown format '{s}'"))),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "para" => Ok(Mode::Para),
            "perp" => Ok(Mode::Perp),
            _ => Err(Error::InvalidConfig(format!("unknown mode '{s}'"))),
        }
    }
}

/// Overrides for a preset; `None` keeps the preset default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub preset: Preset,
    pub n: Option<f64>,
    pub x: Option<f64>,
    pub c4_ratio: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
    pub mode: Option<Mode>,
    pub grid: Option<(usize, usize)>,
    pub u_max: Option<f64>,
    pub v_max: Option<f64>,
    pub r_max: Option<f64>,
    pub n_list: Option<Vec<u32>>,
    pub tol: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn new(preset: Preset, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            preset,
            n: None,
            x: None,
            c4_ratio: None,
            gamma: None,
            phi: None,
            mode: None,
            grid: None,
            u_max: None,
            v_max: None,
            r_max: None,
            n_list: None,
            tol: None,
            out: out.into(),
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.is_some() && self.c4_ratio.is_some() {
            return Err(Error::InvalidConfig(
                "give either --x or --c4-ratio, not both".into(),
            ));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig("tolerance must be positive".into()));
            }
        }
        for (what, v) in [
            ("u_max", self.u_max),
            ("v_max", self.v_max),
            ("r_max", self.r_max),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidConfig(format!("{what} must be positive")));
                }
            }
        }
        if let Some((w, h)) = self.grid {
            if w < 2 || h < 1 {
                return Err(Error::InvalidConfig(
                    "grid needs at least 2 points across and 1 down".into(),
                ));
            }
        }
        if let Some(n) = self.n {
            if !(n >= 0.0) || !n.is_finite() {
                return Err(Error::InvalidConfig(format!("bad occupation n = {n}")));
            }
        }
        self.wigner_settings()?.validate()
    }

    pub fn wigner_settings(&self) -> Result<WignerSettings> {
        let mut s = WignerSettings::default();
        if let Some(l) = &self.n_list {
            s.n_list = l.clone();
        }
        if let Some(t) = self.tol {
            s.tol = t;
        }
        s.v_max = self.v_max.filter(|_| {
            matches!(
                self.preset,
                Preset::Fig5Wigner | Preset::Fig6Contours | Preset::Fig7Slice
            )
        });
        Ok(s)
    }

    fn grid_or(&self, default: (usize, usize)) -> (usize, usize) {
        self.grid.unwrap_or(default)
    }

    fn n_or(&self, default: f64) -> f64 {
        self.n.unwrap_or(default)
    }

    /// `x` from `--x`, from `--c4-ratio` at occupation `n`, or the default list.
    fn x_list_or(&self, n: f64, default: &[f64]) -> Result<Vec<f64>> {
        if let Some(x) = self.x {
            return Ok(vec![x]);
        }
        if let Some(c) = self.c4_ratio {
            return Ok(vec![x_from_c4(n, c)?]);
        }
        Ok(default.to_vec())
    }
}

/// Default `r` range of the Wigner presets; beyond it too few orders of N survive the cancellation cap.
pub const DEFAULT_R_MAX: f64 = 3.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Grid points whose extrapolation did not reach the tolerance.
    pub not_converged: usize,
}

struct Table {
    stem: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(stem: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            stem: stem.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn from_csv(stem: impl Into<String>, header: &[&'static str], csv: &str) -> Self {
        let rows = csv
            .lines()
            .skip(1)
            .map(|l| {
                l.split(',')
                    .map(|c| c.parse::<f64>().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect();
        Table {
            stem: stem.into(),
            header: header.to_vec(),
            rows,
        }
    }

    fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let io = |e: std::io::Error| Error::InvalidConfig(format!("cannot write output: {e}"));
        match format {
            Format::Csv => {
                let path = dir.join(format!("{}.csv", self.stem));
                std::fs::write(&path, csv_string(&self.header, self.rows.iter().cloned()))
                    .map_err(io)?;
                Ok(path)
            }
            Format::Json => {
                let path = dir.join(format!("{}.json", self.stem));
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(|v| num(*v)).collect()))
                    .collect();
                let doc = json!({ "columns": self.header, "rows": rows });
                std::fs::write(&path, serde_json::to_string(&doc).expect("json") + "\n")
                    .map_err(io)?;
                Ok(path)
            }
        }
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(crate::grid::fmt9(v).parse().unwrap_or(v))
        .map_or(Value::Null, Value::Number)
}

fn tag(v: f64) -> String {
    let s = format!("{v}");
    s.replace('.', "p").replace('-', "m")
}

/// Run one preset, writing its data and `<preset>_meta.json` into `cfg.out`.
pub fn run_figure(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", cfg.out.display())))?;
    let mut meta = Map::new();
    let mut tables = Vec::new();
    let mut not_converged = 0usize;
    let settings = cfg.wigner_settings()?;
    let r_max = cfg.r_max.unwrap_or(DEFAULT_R_MAX);

    match cfg.preset {
        Preset::Fig1C4 => {
            let ns = cfg.n.map_or(vec![0.0, 1.0, 10.0], |n| vec![n]);
            let (w, _) = cfg.grid_or((201, 1));
            let xs = Axis::new(0.0, 20.0, w)?;
            let mut t = Table::new(
                "fig1_c4",
                &["n", "x", "c4_ratio", "c4_large_n", "c4_small_n"],
            );
            for &n in &ns {
                for x in xs.values() {
                    t.rows.push(vec![
                        n,
                        x,
                        c4_ratio_nx(n, x)?,
                        c4_large_n_limit(x),
                        c4_small_n_limit(x),
                    ]);
                }
            }
            meta.insert("n_values".into(), json!(ns));
            meta.insert("x_max".into(), num(xs.hi));
            meta.insert("x_points".into(), json!(w));
            tables.push(t);
        }
        Preset::Fig2Purity => {
            let ns = cfg.n.map_or(vec![0.0, 0.1, 0.5, 1.0, 10.0], |n| vec![n]);
            let (w, _) = cfg.grid_or((201, 1));
            let xs = Axis::new(0.0, 100.0, w)?;
            let mut t = Table::new("fig2_purity", &["n", "x", "p_ratio", "p_ratio_large_n"]);
            for &n in &ns {
                for x in xs.values() {
                    t.rows.push(vec![
                        n,
                        x,
                        purity_ratio_nx(n, x)?,
                        purity_limit_large_n(x)?.1,
                    ]);
                }
            }
            meta.insert("n_values".into(), json!(ns));
            meta.insert("x_max".into(), num(xs.hi));
            meta.insert("x_points".into(), json!(w));
            tables.push(t);
        }
        Preset::Fig3DSurface => {
            let n = cfg.n_or(10.0);
            let xs = cfg.x_list_or(n, &[15.0])?;
            let (w, h) = cfg.grid_or((201, 201));
            for &x in &xs {
                let st = ReducedState::new(n, x)?;
                let u = Axis::new(0.0, cfg.u_max.unwrap_or_else(|| default_u_max(&st)), w)?;
                let v = Axis::new(0.0, cfg.v_max.unwrap_or(3.0), h)?;
                let s = d_surface(&st, u, v)?;
                let stem = if xs.len() == 1 {
                    "fig3_dsurface".to_string()
                } else {
                    format!("fig3_dsurface_x{}", tag(x))
                };
                tables.push(Table::from_csv(stem, &["u", "v", "ln_d_norm"], &s.to_csv()));
                meta.insert(format!("max_ln_d_x{}", tag(x)), num(s.max_ln_d));
                meta.insert(format!("argmax_u_x{}", tag(x)), num(u.value(s.argmax.0)));
                meta.insert(format!("argmax_v_x{}", tag(x)), num(v.value(s.argmax.1)));
            }
            meta.insert("n".into(), num(n));
            meta.insert("x_values".into(), json!(xs));
            meta.insert("grid".into(), json!(format!("{w}x{h}")));
        }
        Preset::Fig4DSlices => {
            let n = cfg.n_or(10.0);
            let xs = cfg.x_list_or(n, &[0.0, 0.5, 1.0, 15.0])?;
            let (w, _) = cfg.grid_or((401, 1));
            let u_max = match cfg.u_max {
                Some(u) => u,
                None => xs
                    .iter()
                    .map(|&x| ReducedState::new(n, x).map(|s| default_u_max(&s)))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max),
            };
            let u = Axis::new(0.0, u_max, w)?;
            let mut t = Table::new("fig4_dslices", &["x", "c4_ratio", "u", "ln_d", "ln_d_norm"]);
            for &x in &xs {
                let st = ReducedState::new(n, x)?;
                let vals = crate::parallel_map(u.count, |i| {
                    let uu = u.value(i);
                    ln_d(&st, uu * uu, 0.0).map(|(l, _)| l)
                })?;
                let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let c4 = c4_ratio_nx(n, x)?;
                for (i, l) in vals.into_iter().enumerate() {
                    t.rows.push(vec![x, c4, u.value(i), l, l - top]);
                }
            }
            meta.insert("n".into(), num(n));
            meta.insert("x_values".into(), json!(xs));
            meta.insert("u_max".into(), num(u_max));
            meta.insert("u_points".into(), json!(w));
            tables.push(t);
        }
        Preset::Fig5Wigner => {
            let n = cfg.n_or(10.0);
            let xs = cfg.x_list_or(n, &[15.0])?;
            let (w, h) = cfg.grid_or((101, 101));
            for &x in &xs {
                let st = ReducedState::new(n, x)?;
                let u = Axis::new(0.0, cfg.u_max.unwrap_or_else(|| default_u_max(&st)), w)?;
                let r = Axis::new(0.0, r_max, h)?;
                let g = wigner_grid(&st, u, r, &settings)?;
                not_converged += g.not_converged;
                let stem = if xs.len() == 1 {
                    "fig5_wigner".to_string()
                } else {
                    format!("fig5_wigner_x{}", tag(x))
                };
                tables.push(Table::from_csv(
                    stem,
                    &["u", "r", "ln_w_norm", "spread"],
                    &g.to_csv(),
                ));
                meta.insert(format!("not_converged_x{}", tag(x)), json!(g.not_converged));
                meta.insert(
                    format!("max_spread_x{}", tag(x)),
                    num(g.spread.iter().cloned().fold(0.0, f64::max)),
                );
            }
            meta.insert("n".into(), num(n));
            meta.insert("x_values".into(), json!(xs));
            meta.insert("grid".into(), json!(format!("{w}x{h}")));
        }
        Preset::Fig6Contours => {
            let n = cfg.n_or(10.0);
            let x = cfg.x_list_or(n, &[15.0])?[0];
            let gamma = cfg.gamma.unwrap_or(0.9);
            let phis = cfg.phi.map_or(vec![0.0, std::f64::consts::PI], |p| vec![p]);
            let modes = cfg.mode.map_or(vec![Mode::Para, Mode::Perp], |m| vec![m]);
            let (w, h) = cfg.grid_or((101, 101));
            for &phi in &phis {
                let sq = SqueezeParams::new(n, gamma, phi)?;
                for &mode in &modes {
                    let (pa, pb) = default_projection_axes(&sq, x, mode, r_max, (w, h))?;
                    let g = project_physical(&sq, x, mode, pa, pb, r_max, &settings)?;
                    not_converged += g.not_converged;
                    let m = if mode == Mode::Para { "para" } else { "perp" };
                    let key = format!("{m}_phi{}", tag(phi));
                    tables.push(Table::from_csv(
                        format!("fig6_{key}"),
                        &["phi", "pi", "ln_w_norm"],
                        &g.to_csv(),
                    ));
                    meta.insert(format!("masked_{key}"), json!(g.masked));
                    meta.insert(format!("not_converged_{key}"), json!(g.not_converged));
                }
            }
            meta.insert("n".into(), num(n));
            meta.insert("x".into(), num(x));
            meta.insert("gamma".into(), num(gamma));
            meta.insert("phi_values".into(), json!(phis));
            meta.insert("grid".into(), json!(format!("{w}x{h}")));
        }
        Preset::Fig7Slice => {
            let n = cfg.n_or(10.0);
            let xs = cfg.x_list_or(n, &[0.0, 100.0 * n * n])?;
            let (w, _) = cfg.grid_or((601, 1));
            let s_max = cfg.u_max.unwrap_or(3.0);
            let axis = Axis::new(-s_max, s_max, w)?;
            let mut t = Table::new("fig7_slice", &["x", "phi_scaled", "ln_w_norm", "spread"]);
            // phi / sqrt(N F) = u sqrt(kappa)
            let k = kappa(n);
            for &x in &xs {
                let st = ReducedState::new(n, x)?;
                let vals = crate::parallel_map(axis.count, |i| {
                    let u = axis.value(i).abs() / k.sqrt();
                    WignerSlice::new(&st, u * u, &settings, 1.0)?.ln_w(
                        0.0,
                        settings.extrapolation,
                        settings.tol,
                    )
                })?;
                let top = vals
                    .iter()
                    .map(|v| v.value)
                    .fold(f64::NEG_INFINITY, f64::max);
                not_converged += vals.iter().filter(|v| !v.converged).count();
                for (i, v) in vals.into_iter().enumerate() {
                    t.rows.push(vec![x, axis.value(i), v.value - top, v.spread]);
                }
            }
            meta.insert("n".into(), num(n));
            meta.insert("x_values".into(), json!(xs));
            meta.insert("points".into(), json!(w));
            tables.push(t);
        }
    }

    let mut files = Vec::new();
    for t in &tables {
        files.push(t.write(&cfg.out, cfg.format)?);
    }
    meta.insert("preset".into(), json!(cfg.preset.name()));
    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    meta.insert(
        "format".into(),
        json!(if cfg.format == Format::Csv {
            "csv"
        } else {
            "json"
        }),
    );
    if matches!(
        cfg.preset,
        Preset::Fig5Wigner | Preset::Fig6Contours | Preset::Fig7Slice
    ) {
        meta.insert("n_list".into(), json!(settings.n_list));
        meta.insert("quad_points".into(), json!(settings.quad_points));
        meta.insert(
            "extrapolation".into(),
            json!(format!("{:?}", settings.extrapolation)),
        );
        meta.insert("tol".into(), num(settings.tol));
        meta.insert("max_condition".into(), num(settings.max_condition));
        meta.insert("r_max".into(), num(r_max));
    }
    meta.insert("not_converged".into(), json!(not_converged));
    meta.insert("partial".into(), json!(not_converged > 0));
    let meta_path = cfg.out.join(format!("{}_meta.json", cfg.preset.name()));
    std::fs::write(
        &meta_path,
        serde_json::to_string_pretty(&Value::Object(meta)).expect("json") + "\n",
    )
    .map_err(|e| Error::InvalidConfig(format!("cannot write output: {e}")))?;
    files.push(meta_path);
    Ok(RunOutcome {
        files,
        not_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_roundtrip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig9".parse::<Preset>().is_err());
    }

    #[test]
    fn conflicting_x_rejected() {
        let mut cfg = RunConfig::new(Preset::Fig1C4, "unused");
        cfg.x = Some(1.0);
        cfg.c4_ratio = Some(-0.5);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn file_tags() {
        assert_eq!(tag(0.5), "0p5");
        assert_eq!(tag(15.0), "15");
        assert_eq!(tag(std::f64::consts::PI), "3p141592653589793");
    }
}
