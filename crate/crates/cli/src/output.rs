//! CSV tables, SVG charts, run manifests and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vetra::experiments::{CoherenceComparison, SweepResult};
use vetra::reduced::Trajectory;
use vetra::resonance::ResonanceReport;

use crate::config::ConfigFile;

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn table(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Columns `t, p0, p1..pN, re_s0N, im_s0N, trace, efficiency`.
pub fn trajectory_csv(traj: &Trajectory<f64>) -> Vec<u8> {
    let n = traj.n_sites();
    let mut header = vec!["t".to_string()];
    header.extend((0..=n).map(|j| format!("p{j}")));
    header.extend([
        format!("re_s0{n}"),
        format!("im_s0{n}"),
        "trace".into(),
        "efficiency".into(),
    ]);
    let rows = (0..traj.times.len()).map(|k| {
        let mut r = vec![fmt_f64(traj.times[k])];
        r.extend(traj.populations[k].iter().map(|p| fmt_f64(*p)));
        r.push(fmt_f64(traj.coherence_0n[k].re));
        r.push(fmt_f64(traj.coherence_0n[k].im));
        r.push(fmt_f64(traj.trace[k]));
        r.push(fmt_f64(traj.efficiency[k]));
        r
    });
    table(&header, rows)
}

/// Columns `beta0, efficiency[, stderr], baseline`.
pub fn sweep_csv(res: &SweepResult<f64>) -> Vec<u8> {
    let mut header = vec!["beta0".to_string(), "efficiency".into()];
    if res.stderr.is_some() {
        header.push("stderr".into());
    }
    header.push("baseline".into());
    let rows = (0..res.beta0.len()).map(|k| {
        let mut r = vec![fmt_f64(res.beta0[k]), fmt_f64(res.efficiency[k])];
        if let Some(s) = &res.stderr {
            r.push(fmt_f64(s[k]));
        }
        r.push(fmt_f64(res.baseline));
        r
    });
    table(&header, rows)
}

/// Columns `t, with_vibration, without_vibration` (values of `|σ_0N|`).
pub fn coherence_csv(c: &CoherenceComparison<f64>) -> Vec<u8> {
    let header = ["t", "with_vibration", "without_vibration"].map(String::from);
    let rows = (0..c.times.len()).map(|k| {
        vec![
            fmt_f64(c.times[k]),
            fmt_f64(c.with_vibration[k]),
            fmt_f64(c.without_vibration[k]),
        ]
    });
    table(&header, rows)
}

/// One row per bond and suppression point; bonds without one get a single
/// row with an empty `k`.
pub fn resonance_csv(rep: &ResonanceReport<f64>) -> Vec<u8> {
    let header = [
        "bond",
        "delta_omega",
        "delta_g",
        "order",
        "k",
        "suppression_beta0",
        "window_lo",
        "window_hi",
    ]
    .map(String::from);
    let mut rows = Vec::new();
    for b in &rep.bonds {
        let head = vec![
            b.bond.to_string(),
            fmt_f64(b.delta_omega),
            fmt_f64(b.delta_g),
            b.order.map(|n| n.to_string()).unwrap_or_default(),
        ];
        if b.suppression_beta0.is_empty() {
            let mut r = head.clone();
            r.extend(std::iter::repeat_n(String::new(), 4));
            rows.push(r);
        }
        for (k, s) in b.suppression_beta0.iter().enumerate() {
            let mut r = head.clone();
            r.push((k + 1).to_string());
            r.push(fmt_f64(*s));
            match b.enhancement_windows.get(k) {
                Some((lo, hi)) => {
                    r.push(fmt_f64(*lo));
                    r.push(fmt_f64(*hi));
                }
                None => r.extend([String::new(), String::new()]),
            }
            rows.push(r);
        }
    }
    table(&header, rows.into_iter())
}

pub fn resonance_text(rep: &ResonanceReport<f64>) -> String {
    let mut s = String::new();
    s.push_str(&format!("nu = {}, q0 = {:.6}\n", rep.nu, rep.q0));
    if rep.is_empty() {
        s.push_str("no modulated sideband resonances\n");
    }
    for b in &rep.bonds {
        s.push_str(&format!(
            "bond {}-{}: delta_omega = {}, delta_g = {}",
            b.bond,
            b.bond + 1,
            b.delta_omega,
            b.delta_g
        ));
        match b.order {
            Some(n) => s.push_str(&format!(", order n = {n}\n")),
            None => s.push_str(", off resonance\n"),
        }
        if !b.suppression_beta0.is_empty() {
            let pts: Vec<String> = b.suppression_beta0.iter().map(|x| format!("{x:.4}")).collect();
            s.push_str(&format!("  suppression beta0: {}\n", pts.join(", ")));
            let win: Vec<String> = b
                .enhancement_windows
                .iter()
                .map(|(a, c)| format!("[{a:.4}, {c:.4}]"))
                .collect();
            s.push_str(&format!("  enhancement windows (heuristic): {}\n", win.join(", ")));
        }
    }
    s
}

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// Static SVG 1.1 line chart with axes, grid and at most two series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    assert!(series.len() <= 2, "at most two series");
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let finite = |v: &&f64| v.is_finite();
    let span = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-300 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(series.iter().flat_map(|s| s.x.iter().filter(finite).copied()).collect());
    let (y0, y1) = span(series.iter().flat_map(|s| s.y.iter().filter(finite).copied()).collect());
    let px = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

    let mut s = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    ));
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let (gx, gy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        s.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{T}\" x2=\"{0:.2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n",
            px(gx),
            H - B
        ));
        s.push_str(&format!(
            "<line x1=\"{L}\" y1=\"{0:.2}\" x2=\"{1}\" y2=\"{0:.2}\" stroke=\"#ddd\"/>\n",
            py(gy),
            W - R
        ));
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            px(gx),
            H - B + 16.0,
            tick(gx)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            L - 6.0,
            py(gy) + 4.0,
            tick(gy)
        ));
    }
    s.push_str(&format!(
        "<polyline points=\"{L},{T} {L},{0} {1},{0}\" fill=\"none\" stroke=\"black\"/>\n",
        H - B,
        W - R
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        (L + W - R) / 2.0,
        H - 12.0,
        escape(x_label)
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
        (T + H - B) / 2.0,
        escape(y_label)
    ));
    let styles = [("#1f5fa8", ""), ("#c0392b", " stroke-dasharray=\"6 4\"")];
    for (i, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .x
            .iter()
            .zip(ser.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        let (color, dash) = styles[i];
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
            pts.join(" ")
        ));
        let ly = T + 14.0 + 16.0 * i as f64;
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n<text x=\"{2}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"11\">{4}</text>\n",
            W - R - 150.0,
            W - R - 125.0,
            W - R - 120.0,
            ly + 4.0,
            escape(ser.label)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// Provenance of one CLI run, written as `manifest.json` beside its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// Effective configuration, flags folded in; feeding it back through
    /// `--config` reproduces the outputs.
    pub config: Option<ConfigFile>,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub tolerances: Option<Tolerances>,
    pub horizon: Option<f64>,
    pub workers: Option<usize>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            tool: "vetra",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.into(),
            config: None,
            config_hash: None,
            seed: None,
            tolerances: None,
            horizon: None,
            workers: None,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("manifest serializes");
        v.push(b'\n');
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0, 1.354_712_637_523_355_6] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(!s.contains(','));
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn chart_is_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let svg = line_chart(
            "a <b>",
            "x",
            "y",
            &[
                Series { label: "one", x: &x, y: &[0.0, 1.0, 0.5] },
                Series { label: "two", x: &x, y: &[0.2, 0.2, 0.2] },
            ],
        );
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("version=\"1.1\""));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.csv", b"1\n").unwrap();
        let p = write_atomic(dir.path(), "a.csv", b"2\n").unwrap();
        assert_eq!(std::fs::read(p).unwrap(), b"2\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
