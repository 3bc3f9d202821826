//! Figure tables and verification reports, rendered as CSV or JSON text.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::{ensure, Result};
use dfq::measurement::{
    admix_visibility, exact_qber, outcome_probabilities, sample_counts, white_noise_visibility,
    MeasurementSetting,
};
use dfq::optics::{collective, haar_u2};
use dfq::rng::derive_seed;
use dfq::spdc::{SourceModel, Spatial, SwapModes};
use dfq::states::{classify_outcome, expand_in_basis, DfReadout};
use dfq::tomography::{fidelity, tomography_pipeline, LogicalDensityMatrix, Sampling};
use dfq::{
    decode_logical, encode_logical, phi0, phi1, psi_l, FourfoldOutcome, Ket, LogicalQubit,
    SeedStream, C64,
};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig, Visibility};

/// Experimental fidelity of the protected qubit, quoted in the fig4 header.
pub const REFERENCE_FIDELITY: f64 = 0.9958;

/// Formats with 10 significant digits; values below 1e-15 in magnitude print as zero.
pub fn fmt_sig(x: f64) -> String {
    if x.abs() < 1e-15 {
        return "0.000000000".to_string();
    }
    // The exponent of the rounded scientific form accounts for carries like 9.99..→10.
    let sci = format!("{x:.9e}");
    let exponent: i32 = sci[sci.find('e').expect("scientific format") + 1..]
        .parse()
        .expect("integer exponent");
    let decimals = (9 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureRow {
    pub outcome: String,
    pub ideal_probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_counts: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Confusion {
    pub phi0_consistent: f64,
    pub phi1_consistent: f64,
    pub misclassification_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureTable {
    pub state: &'static str,
    pub noise: &'static str,
    pub visibility: f64,
    pub rows: Vec<FigureRow>,
    pub allowed_outcomes: usize,
    pub qber_exact: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qber_sampled: Option<f64>,
    /// Poisson standard deviation of the sampled QBER around `qber_exact`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qber_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<Confusion>,
}

impl FigureTable {
    pub fn probability(&self, label: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.outcome == label)
            .map(|r| r.ideal_probability)
    }

    pub fn counts(&self, label: &str) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.outcome == label)
            .and_then(|r| r.sampled_counts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Figure {
    pub figure: &'static str,
    pub setting: String,
    pub noise: String,
    pub total_expected: f64,
    pub seed: u64,
    pub tables: Vec<FigureTable>,
}

fn visibility_note(v: &Visibility) -> String {
    match v {
        Visibility::Fixed(v) => format!("visibility={v}"),
        Visibility::FromQber(q) => {
            format!(
                "qber_target={q} visibility per table: v = 1 - 16*q/(16-k), k = allowed outcomes"
            )
        }
    }
}

fn table(
    cfg: &RunConfig,
    setting: &MeasurementSetting,
    label: &'static str,
    base: &Ket,
    noise: Option<&dfq::Operator>,
    index: u64,
) -> Result<FigureTable> {
    let allowed = allowed_outcomes(base, setting)?;
    let state = match noise {
        Some(u4) => u4.apply(base)?,
        None => base.clone(),
    };
    let v = match cfg.visibility {
        Visibility::Fixed(v) => v,
        Visibility::FromQber(q) => white_noise_visibility(q, allowed.len())?,
    };
    let dist = outcome_probabilities(&admix_visibility(&state, v)?, setting)?;
    let counts = if cfg.total_expected > 0.0 {
        Some(sample_counts(
            &dist,
            cfg.total_expected,
            derive_seed(cfg.seed, index),
        )?)
    } else {
        None
    };

    let rows = FourfoldOutcome::all()
        .map(|o| FigureRow {
            outcome: o.label(setting),
            ideal_probability: clean(dist.probability(o)),
            sampled_counts: counts.as_ref().map(|c| c.count(o)),
        })
        .collect();
    let qber_exact = clean(exact_qber(&dist, &allowed));
    let qber_sampled = match &counts {
        Some(c) if c.total() > 0 => Some(dfq::qber(c, &allowed)?),
        _ => None,
    };
    let qber_sigma = counts
        .as_ref()
        .map(|_| (qber_exact / cfg.total_expected).sqrt());

    let confusion = if *setting == MeasurementSetting::READOUT {
        let own = if label == "Phi0" {
            DfReadout::Phi0Consistent
        } else {
            DfReadout::Phi1Consistent
        };
        let mut weights = [0.0f64; 2];
        for o in FourfoldOutcome::all() {
            let w = match &counts {
                Some(c) => c.count(o) as f64,
                None => dist.probability(o),
            };
            let slot = match classify_outcome(o, setting)? {
                DfReadout::Phi0Consistent => 0,
                DfReadout::Phi1Consistent => 1,
            };
            weights[slot] += w;
        }
        let total = weights[0] + weights[1];
        let wrong = if own == DfReadout::Phi0Consistent {
            weights[1]
        } else {
            weights[0]
        };
        Some(Confusion {
            phi0_consistent: clean(weights[0]),
            phi1_consistent: clean(weights[1]),
            misclassification_rate: if total > 0.0 {
                clean(wrong / total)
            } else {
                0.0
            },
        })
    } else {
        None
    };

    Ok(FigureTable {
        state: label,
        noise: if noise.is_some() {
            "collective"
        } else {
            "none"
        },
        visibility: v,
        rows,
        allowed_outcomes: allowed.len(),
        qber_exact,
        qber_sampled,
        qber_sigma,
        confusion,
    })
}

/// Φ0 and Φ1 in `setting`, without and with the configured collective noise.
/// Table `i` samples from `derive_seed(seed, 4·stream + i)`.
fn figure(
    cfg: &RunConfig,
    name: &'static str,
    setting: MeasurementSetting,
    stream: u64,
) -> Result<Figure> {
    let u4 = collective(&cfg.noise.unitary()?, 4)?;
    let mut tables = Vec::new();
    let mut index = 4 * stream;
    for noise in [None, Some(&u4)] {
        for (label, state) in [("Phi0", phi0()), ("Phi1", phi1())] {
            tables.push(table(cfg, &setting, label, &state, noise, index)?);
            index += 1;
        }
    }
    Ok(Figure {
        figure: name,
        setting: setting.to_string(),
        noise: cfg.noise.to_string(),
        total_expected: cfg.total_expected,
        seed: cfg.seed,
        tables,
    })
}

pub fn fig2(cfg: &RunConfig) -> Result<Figure> {
    figure(cfg, "fig2", MeasurementSetting::ALL_Z, 2)
}

pub fn fig3(cfg: &RunConfig) -> Result<Figure> {
    figure(cfg, "fig3", MeasurementSetting::READOUT, 3)
}

pub fn render_figure(fig: &Figure, cfg: &RunConfig) -> Result<String> {
    if cfg.format == OutputFormat::Json {
        return Ok(serde_json::to_string_pretty(fig)? + "\n");
    }
    let mut out = String::new();
    writeln!(out, "# {} setting={}", fig.figure, fig.setting)?;
    writeln!(
        out,
        "# noise={} {} total_expected={} seed={}",
        fig.noise,
        visibility_note(&cfg.visibility),
        fig.total_expected,
        fig.seed
    )?;
    let sampled = fig.total_expected > 0.0;
    for t in &fig.tables {
        writeln!(
            out,
            "# table state={} noise={} visibility={}",
            t.state,
            t.noise,
            fmt_sig(t.visibility)
        )?;
        if sampled {
            writeln!(out, "outcome,ideal_probability,sampled_counts")?;
        } else {
            writeln!(out, "outcome,ideal_probability")?;
        }
        for r in &t.rows {
            match r.sampled_counts {
                Some(n) => writeln!(out, "{},{},{}", r.outcome, fmt_sig(r.ideal_probability), n)?,
                None => writeln!(out, "{},{}", r.outcome, fmt_sig(r.ideal_probability))?,
            }
        }
        let mut line = format!(
            "# qber_exact={} allowed_outcomes={}",
            fmt_sig(t.qber_exact),
            t.allowed_outcomes
        );
        if let (Some(q), Some(s)) = (t.qber_sampled, t.qber_sigma) {
            write!(
                line,
                " qber_sampled={} qber_sigma={}",
                fmt_sig(q),
                fmt_sig(s)
            )?;
        }
        writeln!(out, "{line}")?;
        if let Some(c) = &t.confusion {
            let weight = |w: f64| {
                if sampled {
                    format!("{w:.0}")
                } else {
                    fmt_sig(w)
                }
            };
            writeln!(
                out,
                "# confusion phi0_consistent={} phi1_consistent={} misclassification_rate={}",
                weight(c.phi0_consistent),
                weight(c.phi1_consistent),
                fmt_sig(c.misclassification_rate)
            )?;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityDoc {
    pub basis: [&'static str; 2],
    pub rho: [[[f64; 2]; 2]; 2],
    pub fidelity_vs_input: f64,
}

impl DensityDoc {
    fn new(m: &LogicalDensityMatrix, fidelity_vs_input: f64) -> Self {
        let e = m.entries();
        let pair = |z: C64| [clean(z.re), clean(z.im)];
        Self {
            basis: ["Phi0", "Phi1"],
            rho: [
                [pair(e[0][0]), pair(e[0][1])],
                [pair(e[1][0]), pair(e[1][1])],
            ],
            fidelity_vs_input,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig4 {
    pub noise: String,
    pub total_expected: f64,
    pub seed: u64,
    pub visibility: f64,
    pub reference_fidelity: f64,
    /// `fidelity_vs_input` is against the ideal `|Ψ_L><Ψ_L|`.
    pub rho_in: DensityDoc,
    /// `fidelity_vs_input` is `F(ρ_in, ρ_out)`.
    pub rho_out: DensityDoc,
    pub fidelity: f64,
    pub residual_in: f64,
    pub residual_out: f64,
}

/// Tomography of Ψ_L before and after the configured collective noise.
/// A QBER target maps to visibility through the four-allowed-outcome readout.
pub fn fig4(cfg: &RunConfig) -> Result<Fig4> {
    let v = match cfg.visibility {
        Visibility::Fixed(v) => v,
        Visibility::FromQber(q) => white_noise_visibility(q, 4)?,
    };
    let u4 = collective(&cfg.noise.unitary()?, 4)?;
    let input = psi_l();
    let output = u4.apply(&input)?;
    let sampling = |index| {
        (cfg.total_expected > 0.0).then(|| Sampling {
            total_expected: cfg.total_expected,
            seed: derive_seed(cfg.seed, index),
        })
    };
    let rin = tomography_pipeline(&admix_visibility(&input, v)?, sampling(0))?;
    let rout = tomography_pipeline(&admix_visibility(&output, v)?, sampling(1))?;
    let ideal = LogicalDensityMatrix::from_qubit(&LogicalQubit::psi_l());
    let f = fidelity(&rin.rho, &rout.rho)?;
    Ok(Fig4 {
        noise: cfg.noise.to_string(),
        total_expected: cfg.total_expected,
        seed: cfg.seed,
        visibility: v,
        reference_fidelity: REFERENCE_FIDELITY,
        rho_in: DensityDoc::new(&rin.rho, fidelity(&rin.rho, &ideal)?),
        rho_out: DensityDoc::new(&rout.rho, f),
        fidelity: f,
        residual_in: clean(rin.residual),
        residual_out: clean(rout.residual),
    })
}

pub fn render_fig4(fig: &Fig4, cfg: &RunConfig) -> Result<String> {
    if cfg.format == OutputFormat::Json {
        return Ok(serde_json::to_string_pretty(fig)? + "\n");
    }
    let mut out = String::new();
    writeln!(
        out,
        "# fig4 logical tomography of (sqrt3|Phi0> - |Phi1>)/2 before and after collective noise"
    )?;
    writeln!(
        out,
        "# noise={} {} total_expected={} seed={}",
        fig.noise,
        visibility_note(&cfg.visibility),
        fig.total_expected,
        fig.seed
    )?;
    writeln!(out, "# reference_fidelity={}", fig.reference_fidelity)?;
    writeln!(out, "matrix,row,col,re,im")?;
    for (name, doc) in [("rho_in", &fig.rho_in), ("rho_out", &fig.rho_out)] {
        for (i, row) in doc.rho.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                writeln!(out, "{name},{i},{j},{},{}", fmt_sig(z[0]), fmt_sig(z[1]))?;
            }
        }
    }
    writeln!(
        out,
        "# fidelity_in_vs_ideal={}",
        fmt_sig(fig.rho_in.fidelity_vs_input)
    )?;
    writeln!(out, "# fidelity={}", fmt_sig(fig.fidelity))?;
    writeln!(
        out,
        "# residual_in={} residual_out={}",
        fmt_sig(fig.residual_in),
        fmt_sig(fig.residual_out)
    )?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplitudeRow {
    pub state: &'static str,
    pub setting: String,
    pub outcome: String,
    pub re: f64,
    pub im: f64,
}

/// Nonzero amplitudes of Φ0, Φ1 and Ψ_L in the `ZZZZ` and `ZZXX` bases.
pub fn states() -> Result<Vec<AmplitudeRow>> {
    let mut rows = Vec::new();
    for (name, s) in [("Phi0", phi0()), ("Phi1", phi1()), ("Psi_L", psi_l())] {
        for setting in [MeasurementSetting::ALL_Z, MeasurementSetting::READOUT] {
            for (o, a) in expand_in_basis(&s, &setting)? {
                if a.norm() > 1e-12 {
                    rows.push(AmplitudeRow {
                        state: name,
                        setting: setting.to_string(),
                        outcome: o.label(&setting),
                        re: clean(a.re),
                        im: clean(a.im),
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn render_states(rows: &[AmplitudeRow], format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return Ok(serde_json::to_string_pretty(rows)? + "\n");
    }
    let mut out = String::from("state,setting,outcome,re,im\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.state,
            r.setting,
            r.outcome,
            fmt_sig(r.re),
            fmt_sig(r.im)
        )?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub draw: usize,
    pub overlap_phi0: f64,
    pub overlap_phi1: f64,
    pub fidelity_logical: f64,
    pub overlap_control: f64,
}

/// Control state for the sweep: `|0101>`, not decoherence-free.
fn control_state() -> Ket {
    Ket::basis(16, 0b0101).expect("index in range")
}

/// Draw 0 is the identity; draws `1..n` are Haar-random U(2).
pub fn invariance_sweep(n_draws: usize, seed: u64) -> Result<Vec<SweepRow>> {
    ensure!(n_draws >= 1, "need at least one draw");
    let mut haar = SeedStream::derived(seed, 0);
    let mut qubits = SeedStream::derived(seed, 1);
    let (p0, p1, control) = (phi0(), phi1(), control_state());
    let mut rows = Vec::with_capacity(n_draws);
    for draw in 0..n_draws {
        let u = if draw == 0 {
            dfq::Operator::identity(2)?
        } else {
            haar_u2(&mut haar)
        };
        let u4 = collective(&u, 4)?;
        let q = LogicalQubit::random(&mut qubits);
        let moved = decode_logical(&u4.apply(&encode_logical(&q))?)?;
        rows.push(SweepRow {
            draw,
            overlap_phi0: p0.overlap(&u4.apply(&p0)?)?,
            overlap_phi1: p1.overlap(&u4.apply(&p1)?)?,
            fidelity_logical: q.overlap(&moved.qubit),
            overlap_control: control.overlap(&u4.apply(&control)?)?,
        });
    }
    Ok(rows)
}

/// Fraction of draws whose control overlap falls below 0.999.
pub fn control_disturbed_fraction(rows: &[SweepRow]) -> f64 {
    rows.iter().filter(|r| r.overlap_control < 0.999).count() as f64 / rows.len() as f64
}

pub fn render_sweep(rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return Ok(serde_json::to_string_pretty(rows)? + "\n");
    }
    let mut out = String::from("draw,overlap_phi0,overlap_phi1,fidelity_logical,overlap_control\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.draw,
            fmt_sig(r.overlap_phi0),
            fmt_sig(r.overlap_phi1),
            fmt_sig(r.fidelity_logical),
            fmt_sig(r.overlap_control)
        )?;
    }
    let range = |f: fn(&SweepRow) -> f64| {
        let (lo, hi) = rows
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
        format!("{}..{}", fmt_sig(lo), fmt_sig(hi))
    };
    writeln!(
        out,
        "# summary overlap_phi0={} overlap_phi1={} fidelity_logical={} overlap_control={} control_disturbed_fraction={}",
        range(|r| r.overlap_phi0),
        range(|r| r.overlap_phi1),
        range(|r| r.fidelity_logical),
        range(|r| r.overlap_control),
        fmt_sig(control_disturbed_fraction(rows))
    )?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpdcReport {
    pub tau: f64,
    pub postselection_probability: f64,
    pub fidelity_phi1: f64,
    pub fidelity_psi_l: f64,
    pub rate_ratio: f64,
}

/// State fidelities are `|<ψ|φ>|` between pure states.
pub fn spdc_verify(tau: f64) -> Result<SpdcReport> {
    let model = SourceModel::new(tau)?;
    let post = model.second_order_pipeline()?;
    let swapped = post.state.swap_modes(Spatial::B, Spatial::C)?;
    Ok(SpdcReport {
        tau,
        postselection_probability: post.probability,
        fidelity_phi1: post.state.overlap(&phi1())?,
        fidelity_psi_l: swapped.overlap(&psi_l())?,
        rate_ratio: model.rate_ratio()?,
    })
}

pub fn render_spdc(r: &SpdcReport, format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return Ok(serde_json::to_string_pretty(r)? + "\n");
    }
    let mut out = String::from("quantity,value\n");
    for (k, v) in [
        ("tau", r.tau),
        ("postselection_probability", r.postselection_probability),
        ("fidelity_phi1", r.fidelity_phi1),
        ("fidelity_psi_l", r.fidelity_psi_l),
        ("rate_ratio", r.rate_ratio),
    ] {
        writeln!(out, "{k},{}", fmt_sig(v))?;
    }
    Ok(out)
}

/// Outcomes a DF basis state can produce in `setting`.
pub fn allowed_outcomes(
    state: &Ket,
    setting: &MeasurementSetting,
) -> Result<BTreeSet<FourfoldOutcome>> {
    Ok(outcome_probabilities(state, setting)?.support(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.25), "0.2500000000");
        assert_eq!(fmt_sig(1.0), "1.000000000");
        assert_eq!(fmt_sig(-0.5773502691896258), "-0.5773502692");
        assert_eq!(fmt_sig(1.0 / 12.0), "0.08333333333");
        assert_eq!(fmt_sig(0.0), "0.000000000");
        assert_eq!(fmt_sig(-1e-20), "0.000000000");
        assert_eq!(fmt_sig(0.99999999999), "1.000000000");
        assert_eq!(fmt_sig(1234.5), "1234.500000");
        assert_eq!(fmt_sig(3e10), "30000000000");
    }

    #[test]
    fn states_report_examples() {
        let rows = states().unwrap();
        let find = |state: &str, setting: &str, outcome: &str| {
            rows.iter()
                .find(|r| r.state == state && r.setting == setting && r.outcome == outcome)
                .map(|r| r.re)
        };
        assert!((find("Phi0", "ZZZZ", "HVHV").unwrap() - 0.5).abs() < 1e-12);
        assert!((find("Phi1", "ZZZZ", "HHVV").unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let s3 = 3f64.sqrt();
        let want = (s3 * 0.5 + 1.0 / (2.0 * s3)) / 2.0;
        assert!((find("Psi_L", "ZZZZ", "HVHV").unwrap() - want).abs() < 1e-12);
        assert!((want - 1.0 / s3).abs() < 1e-12);
    }

    #[test]
    fn exact_fig3_has_no_false_phi1_counts() {
        let cfg = RunConfig {
            total_expected: 0.0,
            ..RunConfig::default()
        };
        let fig = fig3(&cfg).unwrap();
        let phi1 = &fig.tables[1];
        for label in ["HV+-", "HV-+", "VH+-", "VH-+"] {
            assert_eq!(phi1.probability(label), Some(0.0));
        }
        assert_eq!(phi1.confusion.as_ref().unwrap().misclassification_rate, 0.0);
        let csv = render_figure(&fig, &cfg).unwrap();
        assert!(csv.contains("outcome,ideal_probability\n"));
        assert!(!csv.contains("sampled_counts"));
    }

    #[test]
    fn sweep_identity_draw_is_exact() {
        let rows = invariance_sweep(5, 3).unwrap();
        let r = &rows[0];
        assert!((r.overlap_phi0 - 1.0).abs() < 1e-15);
        assert!((r.overlap_control - 1.0).abs() < 1e-15);
        assert!(invariance_sweep(0, 3).is_err());
    }

    #[test]
    fn spdc_report_values() {
        for tau in [1.0, 0.2] {
            let r = spdc_verify(tau).unwrap();
            assert!((r.fidelity_phi1 - 1.0).abs() < 1e-9);
            assert!((r.fidelity_psi_l - 1.0).abs() < 1e-9);
            assert!((r.rate_ratio - 3.0).abs() < 1e-9);
        }
        assert!(spdc_verify(0.0).is_err());
    }
}
