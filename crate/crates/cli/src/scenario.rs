//! Typed scenarios built from a config and the artifacts they produce.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use iondecay_core::carrier::{self, CarrierParams, GaussianPState, GridSpec};
use iondecay_core::coupling::{self, DispersionLaw, GasIonSystem, ELEMENTARY_CHARGE};
use iondecay_core::heuristic::{self, HeuristicParams};
use iondecay_core::hierarchy::{self, HierarchyParams};
use iondecay_core::ode::uniform_grid;
use iondecay_core::oracle::{self, OracleMode, OracleParams};
use iondecay_core::pulses::{self, PulseParams};
use iondecay_core::{Complex64, DensityMatrix, FockSpinVector, SpinLabel, TimeSeries};

use crate::config::{ConfigError, ConfigResult, RawConfig, Reader, Resolved};
use crate::error::AppError;
use crate::format;
use crate::svg::{self, Axes, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ajc,
    AjcOracle,
    Carrier,
    CarrierGrid,
    Heuristic,
    CouplingSweep,
    Langevin,
    PulseDemo,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Ajc,
        Mode::AjcOracle,
        Mode::Carrier,
        Mode::CarrierGrid,
        Mode::Heuristic,
        Mode::CouplingSweep,
        Mode::Langevin,
        Mode::PulseDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Ajc => "ajc",
            Mode::AjcOracle => "ajc_oracle",
            Mode::Carrier => "carrier",
            Mode::CarrierGrid => "carrier_grid",
            Mode::Heuristic => "heuristic",
            Mode::CouplingSweep => "coupling_sweep",
            Mode::Langevin => "langevin",
            Mode::PulseDemo => "pulse_demo",
        }
    }

    fn parse(s: &str) -> ConfigResult<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid("mode", s, "unknown mode"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    fn parse(s: &str) -> ConfigResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "both" => Ok(Format::Both),
            _ => Err(invalid("format", s, "expected csv, svg or both")),
        }
    }

    fn csv(self) -> bool {
        self != Format::Svg
    }

    fn svg(self) -> bool {
        self != Format::Csv
    }
}

fn invalid(key: &str, value: impl ToString, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn positive(r: &mut Reader, key: &str) -> ConfigResult<f64> {
    let v = r.f64(key)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, v, "must be positive"))
    }
}

fn nonnegative(r: &mut Reader, key: &str, default: Option<f64>) -> ConfigResult<f64> {
    let v = match default {
        Some(d) => r.f64_or(key, d)?,
        None => r.f64(key)?,
    };
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, v, "must be nonnegative"))
    }
}

/// `t_max_s` and `dt_s` as a uniform grid starting at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TimeAxis {
    t_max: f64,
    steps: usize,
}

impl TimeAxis {
    fn read(r: &mut Reader) -> ConfigResult<Self> {
        let t_max = positive(r, "t_max_s")?;
        let dt = positive(r, "dt_s")?;
        let steps = (t_max / dt).round();
        if !(1.0..=1e8).contains(&steps) {
            return Err(invalid("dt_s", dt, "gives fewer than 1 or more than 1e8 steps"));
        }
        Ok(Self {
            t_max,
            steps: steps as usize,
        })
    }

    fn grid(&self) -> Vec<f64> {
        uniform_grid(self.t_max, self.steps)
    }
}

/// Sideband physics shared by the hierarchy and oracle modes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sideband {
    g: f64,
    gamma: f64,
    nbar: f64,
    n0: usize,
}

impl Sideband {
    fn read(r: &mut Reader) -> ConfigResult<Self> {
        let g = read_g(r)?;
        let gamma_over_g = nonnegative(r, "gamma_over_g", None)?;
        let nbar = nonnegative(r, "nbar", None)?;
        let n0 = r.usize_or("n0", 0)?;
        Ok(Self {
            g,
            gamma: gamma_over_g * g,
            nbar,
            n0,
        })
    }
}

/// `g = η_L·2π·Ω`.
fn read_g(r: &mut Reader) -> ConfigResult<f64> {
    let eta_l = positive(r, "eta_l")?;
    let omega_hz = positive(r, "omega_hz")?;
    Ok(eta_l * 2.0 * PI * omega_hz)
}

#[derive(Debug, Clone, PartialEq)]
struct Overlay {
    gamma0: f64,
    rabi: f64,
    exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Ajc {
        phys: Sideband,
        truncation: usize,
        time: TimeAxis,
        overlay: Option<Overlay>,
        envelope_window: f64,
    },
    AjcOracle {
        phys: Sideband,
        n_max: usize,
        phi: f64,
        time: TimeAxis,
    },
    Carrier {
        params: CarrierParams,
        alpha: Complex64,
        time: TimeAxis,
    },
    CarrierGrid {
        params: CarrierParams,
        alpha: Complex64,
        times: Vec<f64>,
        grid: GridSpec,
    },
    Heuristic {
        params: HeuristicParams,
        time: TimeAxis,
    },
    CouplingSweep {
        system: GasIonSystem,
        dispersion: DispersionLaw,
        k_min: f64,
        k_max: f64,
        k_points: usize,
    },
    Langevin {
        system: GasIonSystem,
        r_probe: Option<f64>,
    },
    PulseDemo {
        n_max: usize,
        n0: usize,
        spin: SpinLabel,
        pulse: String,
        params: PulseParams,
    },
}

/// A file to be written, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// `key = value` summary lines.
    pub report: Vec<String>,
}

impl Outcome {
    fn report(&mut self, key: &str, value: f64) {
        self.report.push(format!("{key} = {}", format::number(value)));
    }

    /// Writes every artifact under `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, AppError> {
        fs::create_dir_all(dir).map_err(|source| AppError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        for a in &self.artifacts {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents).map_err(|source| AppError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    mode: Mode,
    output: String,
    format: Format,
    overlay_csv: Option<String>,
    kind: Kind,
    resolved: Resolved,
}

impl Scenario {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn from_raw(raw: &RawConfig) -> ConfigResult<Self> {
        let mut r = Reader::new(raw);
        let mode = Mode::parse(&r.string("mode")?)?;
        let output = r.string_or("output", mode.name());
        if output.is_empty() || output.contains(['/', '\\']) {
            return Err(invalid("output", &output, "must be a bare file stem"));
        }
        let format = Format::parse(&r.string_or("format", "csv"))?;
        let kind = read_kind(mode, &mut r)?;
        let overlay_csv = match mode {
            Mode::Ajc | Mode::AjcOracle | Mode::Heuristic => r.string_opt("overlay_csv"),
            _ => None,
        };
        let mut resolved = r.finish()?;
        add_derived(&kind, &mut resolved);
        Ok(Self {
            mode,
            output,
            format,
            overlay_csv,
            kind,
            resolved,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn output(&self) -> &str {
        &self.output
    }

    pub fn resolved(&self) -> &Resolved {
        &self.resolved
    }

    /// Runs the scenario; `base_dir` resolves a relative `overlay_csv`.
    pub fn run(&self, base_dir: &Path) -> Result<Outcome, AppError> {
        let header = self.resolved.header();
        let overlay = match &self.overlay_csv {
            Some(p) => {
                let path = base_dir.join(p);
                let text = fs::read_to_string(&path).map_err(|source| AppError::Io { path, source })?;
                Some(format::read_two_columns(&text))
            }
            None => None,
        };
        let mut out = Outcome::default();
        let ctx = self.mode.name();
        let err = |e| AppError::numeric(ctx, e);
        match &self.kind {
            Kind::Ajc {
                phys,
                truncation,
                time,
                overlay: heur,
                envelope_window,
            } => {
                let hp = HierarchyParams::new(phys.g, phys.gamma, phys.nbar, *truncation, phys.n0)
                    .map_err(err)?;
                let grid = time.grid();
                let run = hierarchy::integrate(&hp, &grid).map_err(err)?;
                out.report("g_rad_s", phys.g);
                out.report("flop_period_s", PI / (phys.g * ((phys.n0 + 1) as f64).sqrt()));
                report_envelope(&mut out, "hierarchy", &run.series, *envelope_window);
                let mut curves = vec![("hierarchy P_down", run.series.clone())];
                self.emit_series(&mut out, &header, "", &run.series);
                if let Some(h) = heur {
                    let hp = HeuristicParams::fock(phys.n0, h.rabi, h.gamma0)
                        .and_then(|p| p.with_exponent(h.exponent))
                        .map_err(err)?;
                    let s = heuristic::heuristic_series(&hp, &grid);
                    report_envelope(&mut out, "heuristic", &s, *envelope_window);
                    self.emit_series(&mut out, &header, "_heuristic", &s);
                    curves.push(("heuristic P_down", s));
                }
                self.emit_plot(&mut out, "damped blue-sideband flopping", &curves, overlay.as_deref());
            }
            Kind::AjcOracle {
                phys,
                n_max,
                phi,
                time,
            } => {
                let op = OracleParams::new(phys.g, *phi, phys.gamma, phys.nbar, *n_max, OracleMode::AjcDrive)
                    .map_err(err)?;
                let rho0 = DensityMatrix::diagonal(op.n_max, &[(phys.n0, SpinLabel::Down, 1.0)])
                    .map_err(err)?;
                let run = oracle::evolve(&op, &rho0, &time.grid()).map_err(err)?;
                out.report("g_rad_s", phys.g);
                out.report("n_max_used", op.n_max as f64);
                self.emit_series(&mut out, &header, "", &run.series);
                self.emit_plot(&mut out, "Lindblad reference", &[("oracle P_down", run.series)], overlay.as_deref());
            }
            Kind::Carrier {
                params,
                alpha,
                time,
            } => {
                let grid = time.grid();
                let mut rows = Vec::with_capacity(grid.len());
                for &t in &grid {
                    let center = carrier::propagator_u(params, t) * alpha;
                    rows.push(vec![
                        t,
                        carrier::mean_excitation(params, *alpha, t),
                        center.re,
                        center.im,
                        carrier::dispersion_d(params, t),
                    ]);
                }
                let last = rows.last().expect("grid has at least two points");
                out.report("mean_n_final", last[1]);
                if self.format.csv() {
                    out.artifacts.push(Artifact {
                        name: format!("{}.csv", self.output),
                        contents: format::table(
                            &header,
                            "t_s,mean_n,center_re,center_im,dispersion",
                            rows.iter().cloned(),
                        ),
                    });
                }
                if self.format.svg() {
                    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
                    let n: Vec<f64> = rows.iter().map(|r| r[1]).collect();
                    let d: Vec<f64> = rows.iter().map(|r| r[4]).collect();
                    out.artifacts.push(Artifact {
                        name: format!("{}.svg", self.output),
                        contents: svg::line_plot(
                            &Axes {
                                title: "motional excitation under carrier driving",
                                x_label: "t (s)",
                                y_label: "excitation",
                            },
                            &[
                                Series { label: "mean n", x: &t, y: &n },
                                Series { label: "D(t)", x: &t, y: &d },
                            ],
                        ),
                    });
                }
            }
            Kind::CarrierGrid {
                params,
                alpha,
                times,
                grid,
            } => {
                for (i, &t) in times.iter().enumerate() {
                    let pg = carrier::pgrid(params, *alpha, t, *grid).map_err(err)?;
                    let state = GaussianPState::coherent(params, *alpha, t).map_err(err)?;
                    let mean = pg.mean();
                    let tag = format!("t{i}");
                    out.report(&format!("{tag}_t_s"), t);
                    out.report(&format!("{tag}_grid_mean_re"), mean.re);
                    out.report(&format!("{tag}_grid_mean_im"), mean.im);
                    out.report(&format!("{tag}_grid_variance"), pg.central_second_moment());
                    out.report(&format!("{tag}_exact_center_re"), state.center().re);
                    out.report(&format!("{tag}_exact_center_im"), state.center().im);
                    out.report(&format!("{tag}_exact_variance"), state.dispersion);
                    let stem = format!("{}_{i}", self.output);
                    if self.format.csv() {
                        out.artifacts.push(Artifact {
                            name: format!("{stem}.csv"),
                            contents: format::table(
                                &header,
                                "re,im,p",
                                pg.nodes().map(|(z, v)| vec![z.re, z.im, v]),
                            ),
                        });
                    }
                    if self.format.svg() {
                        let title = format!("P function at t = {} s", format::number(t));
                        out.artifacts.push(Artifact {
                            name: format!("{stem}.svg"),
                            contents: svg::grid_plot(
                                &Axes {
                                    title: &title,
                                    x_label: "Re γ",
                                    y_label: "Im γ",
                                },
                                (grid.re_min, grid.re_max, grid.n_re),
                                (grid.im_min, grid.im_max, grid.n_im),
                                &pg.values,
                            ),
                        });
                    }
                }
            }
            Kind::Heuristic { params, time } => {
                let s = heuristic::heuristic_series(params, &time.grid());
                report_envelope(&mut out, "heuristic", &s, time.t_max);
                self.emit_series(&mut out, &header, "", &s);
                self.emit_plot(&mut out, "phenomenological damped Rabi model", &[("heuristic P_down", s)], overlay.as_deref());
            }
            Kind::CouplingSweep {
                system,
                dispersion,
                k_min,
                k_max,
                k_points,
            } => {
                let rates = coupling::langevin_rates(system);
                out.report("lambda_j_m", system.lambda());
                out.report("reaction_rate_per_s", rates.reaction_rate);
                let ks = log_space(*k_min, *k_max, *k_points);
                let mut vks = Vec::with_capacity(ks.len());
                for &k in &ks {
                    vks.push(coupling::coupling_vk(k, system, dispersion).map_err(err)?);
                }
                let peak = ks
                    .iter()
                    .zip(&vks)
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .expect("at least two points");
                out.report("peak_k_per_m", *peak.0);
                out.report("peak_vk_j", *peak.1);
                out.report(
                    "peak_gk_rad_s",
                    coupling::coupling_rate(*peak.0, system, dispersion).map_err(err)?,
                );
                if self.format.csv() {
                    out.artifacts.push(Artifact {
                        name: format!("{}.csv", self.output),
                        contents: format::table(
                            &header,
                            "k,vk",
                            ks.iter().zip(&vks).map(|(&k, &v)| vec![k, v]),
                        ),
                    });
                }
                if self.format.svg() {
                    let lk: Vec<f64> = ks.iter().map(|k| k.log10()).collect();
                    out.artifacts.push(Artifact {
                        name: format!("{}.svg", self.output),
                        contents: svg::line_plot(
                            &Axes {
                                title: "ion-gas coupling",
                                x_label: "log10 k (1/m)",
                                y_label: "V_k (J)",
                            },
                            &[Series { label: "V_k", x: &lk, y: &vks }],
                        ),
                    });
                }
            }
            Kind::Langevin { system, r_probe } => {
                let rates = coupling::langevin_rates(system);
                out.report("impact_param_m", rates.impact_param);
                out.report("rate_const_m3_per_s", rates.rate_const);
                out.report("reaction_rate_per_s", rates.reaction_rate);
                out.report("reaction_rate_closed_form_per_s", coupling::langevin_rate_closed_form(system));
                if let Some(r) = r_probe {
                    out.report("potential_j", coupling::polarization_potential(system, *r).map_err(err)?);
                }
                let mut text = header.clone();
                for line in &out.report {
                    text.push_str(line);
                    text.push('\n');
                }
                out.artifacts.push(Artifact {
                    name: format!("{}.txt", self.output),
                    contents: text,
                });
            }
            Kind::PulseDemo {
                n_max,
                n0,
                spin,
                pulse,
                params,
            } => {
                let psi = FockSpinVector::basis(*n_max, *n0, *spin).map_err(err)?;
                let after = match pulse.as_str() {
                    "carrier" => pulses::apply_carrier(&psi, *params),
                    "jc" => pulses::apply_jc(&psi, *params).map_err(err)?,
                    _ => pulses::apply_ajc(&psi, *params).map_err(err)?,
                };
                use iondecay_core::Observables;
                out.report("p_down", after.p_down());
                out.report("mean_n", after.expect_number());
                let rows = (0..=*n_max).flat_map(|n| {
                    [SpinLabel::Down, SpinLabel::Up].map(|s| {
                        let a = after.amplitude(n, s);
                        vec![n as f64, s.index() as f64, a.re, a.im]
                    })
                });
                out.artifacts.push(Artifact {
                    name: format!("{}.csv", self.output),
                    contents: format::table(&header, "n,s,re,im", rows),
                });
            }
        }
        Ok(out)
    }

    fn emit_series(&self, out: &mut Outcome, header: &str, suffix: &str, s: &TimeSeries) {
        if self.format.csv() {
            out.artifacts.push(Artifact {
                name: format!("{}{suffix}.csv", self.output),
                contents: format::time_series(header, s),
            });
        }
    }

    fn emit_plot(
        &self,
        out: &mut Outcome,
        title: &str,
        curves: &[(&str, TimeSeries)],
        overlay: Option<&[(f64, f64)]>,
    ) {
        if !self.format.svg() {
            return;
        }
        let micro: Vec<Vec<f64>> = curves
            .iter()
            .map(|(_, s)| s.times.iter().map(|t| t * 1e6).collect())
            .collect();
        let mut series: Vec<Series> = curves
            .iter()
            .zip(&micro)
            .map(|((label, s), x)| Series {
                label,
                x,
                y: &s.p_down,
            })
            .collect();
        let (ox, oy): (Vec<f64>, Vec<f64>) = overlay
            .unwrap_or(&[])
            .iter()
            .map(|(t, p)| (t * 1e6, *p))
            .unzip();
        if overlay.is_some() {
            series.push(Series {
                label: "data",
                x: &ox,
                y: &oy,
            });
        }
        out.artifacts.push(Artifact {
            name: format!("{}.svg", self.output),
            contents: svg::line_plot(
                &Axes {
                    title,
                    x_label: "t (µs)",
                    y_label: "P↓",
                },
                &series,
            ),
        });
    }
}

fn report_envelope(out: &mut Outcome, label: &str, s: &TimeSeries, window: f64) {
    if let Ok(env) = heuristic::analyze_envelopes(&s.times, &s.p_down, window) {
        out.report(&format!("{label}_midline_asymmetry"), env.midline_asymmetry);
        out.report(&format!("{label}_upper_rate_per_s"), env.upper_rate);
        out.report(&format!("{label}_lower_rate_per_s"), env.lower_rate);
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn read_alpha(r: &mut Reader) -> ConfigResult<Complex64> {
    Ok(Complex64::new(r.f64("alpha_re")?, r.f64_or("alpha_im", 0.0)?))
}

fn read_carrier(r: &mut Reader) -> ConfigResult<CarrierParams> {
    let gamma = nonnegative(r, "gamma", None)?;
    let nu = positive(r, "nu")?;
    let nbar = nonnegative(r, "nbar", None)?;
    CarrierParams::new(gamma, nu, nbar).map_err(|e| invalid("gamma", gamma, &e.to_string()))
}

fn read_kind(mode: Mode, r: &mut Reader) -> ConfigResult<Kind> {
    Ok(match mode {
        Mode::Ajc => {
            let phys = Sideband::read(r)?;
            let truncation = r.usize_or("truncation", hierarchy::DEFAULT_TRUNCATION)?;
            let time = TimeAxis::read(r)?;
            let overlay = match r.f64_opt("heuristic_gamma0")? {
                Some(gamma0) => Some(Overlay {
                    gamma0,
                    rabi: r.f64_or("heuristic_rabi", phys.g)?,
                    exponent: r.f64_or("heuristic_exponent", heuristic::DEFAULT_EXPONENT)?,
                }),
                None => None,
            };
            let envelope_window = r.f64_or("envelope_window_s", time.t_max)?;
            Kind::Ajc {
                phys,
                truncation,
                time,
                overlay,
                envelope_window,
            }
        }
        Mode::AjcOracle => Kind::AjcOracle {
            phys: Sideband::read(r)?,
            n_max: r.usize_or("n_max", 14)?,
            phi: r.f64_or("phi", 0.0)?,
            time: TimeAxis::read(r)?,
        },
        Mode::Carrier => Kind::Carrier {
            params: read_carrier(r)?,
            alpha: read_alpha(r)?,
            time: TimeAxis::read(r)?,
        },
        Mode::CarrierGrid => {
            let params = read_carrier(r)?;
            let alpha = read_alpha(r)?;
            let times = r.f64_list("times_s")?;
            if times.iter().any(|&t| t < 0.0) {
                return Err(invalid("times_s", format!("{times:?}"), "must be nonnegative"));
            }
            let points = r.usize_or("grid_points", 201)?;
            if points < 2 {
                return Err(invalid("grid_points", points, "needs at least 2"));
            }
            let default_half = GridSpec::default_for(alpha, params.nbar).re_max;
            let half = r.f64_or("grid_half_width", default_half)?;
            if half <= 0.0 {
                return Err(invalid("grid_half_width", half, "must be positive"));
            }
            Kind::CarrierGrid {
                params,
                alpha,
                times,
                grid: GridSpec::square(half, points),
            }
        }
        Mode::Heuristic => {
            let g = read_g(r)?;
            let rabi = r.f64_or("rabi", g)?;
            let gamma0 = nonnegative(r, "gamma0", None)?;
            let p_dist = if r.has("p_dist") {
                r.f64_list("p_dist")?
            } else {
                let n0 = r.usize_or("n0", 0)?;
                let mut p = vec![0.0; n0 + 1];
                p[n0] = 1.0;
                p
            };
            let exponent = r.f64_or("exponent", heuristic::DEFAULT_EXPONENT)?;
            let params = HeuristicParams::new(p_dist, rabi, gamma0)
                .and_then(|p| p.with_exponent(exponent))
                .map_err(|e| invalid("p_dist", "", &e.to_string()))?;
            Kind::Heuristic {
                params,
                time: TimeAxis::read(r)?,
            }
        }
        Mode::CouplingSweep => {
            let system = GasIonSystem {
                chi: nonnegative(r, "chi", None)?,
                q: r.f64_or("q", ELEMENTARY_CHARGE)?,
                rho_number: nonnegative(r, "rho_number", None)?,
                rho_mass: positive(r, "rho_mass")?,
                reduced_mass: positive(r, "reduced_mass")?,
                rel_velocity: positive(r, "rel_velocity")?,
                ion_mass: positive(r, "ion_mass")?,
                trap_freq: positive(r, "trap_freq")?,
                z: positive(r, "z")?,
                area_s: positive(r, "area_s")?,
            };
            system
                .validate()
                .map_err(|e| invalid("q", system.q, &e.to_string()))?;
            let amplitude = positive(r, "dispersion_amplitude")?;
            let exponent = r.f64_or("dispersion_exponent", DispersionLaw::DEFAULT_EXPONENT)?;
            let dispersion = DispersionLaw::power_law(amplitude, exponent)
                .map_err(|e| invalid("dispersion_exponent", exponent, &e.to_string()))?;
            let k_min = positive(r, "k_min")?;
            let k_max = positive(r, "k_max")?;
            if k_max <= k_min {
                return Err(invalid("k_max", k_max, "must exceed k_min"));
            }
            let k_points = r.usize_or("k_points", 200)?;
            if k_points < 2 {
                return Err(invalid("k_points", k_points, "needs at least 2"));
            }
            Kind::CouplingSweep {
                system,
                dispersion,
                k_min,
                k_max,
                k_points,
            }
        }
        Mode::Langevin => {
            let chi = nonnegative(r, "chi", None)?;
            let q = r.f64_or("q", ELEMENTARY_CHARGE)?;
            let rho_number = nonnegative(r, "rho_number", None)?;
            let reduced_mass = positive(r, "reduced_mass")?;
            let rel_velocity = positive(r, "rel_velocity")?;
            let r_probe = r.f64_opt("r_probe")?;
            // fields below do not enter the collision rates
            let system = GasIonSystem {
                chi,
                q,
                rho_number,
                rho_mass: f64::NAN,
                reduced_mass,
                rel_velocity,
                ion_mass: f64::NAN,
                trap_freq: f64::NAN,
                z: f64::NAN,
                area_s: f64::NAN,
            };
            Kind::Langevin { system, r_probe }
        }
        Mode::PulseDemo => {
            let n_max = r.usize_or("n_max", 12)?;
            let n0 = r.usize_or("n0", 0)?;
            let spin = match r.string_or("spin", "down").as_str() {
                "down" => SpinLabel::Down,
                "up" => SpinLabel::Up,
                other => return Err(invalid("spin", other, "expected down or up")),
            };
            let pulse = r.string_or("pulse", "ajc");
            if !["carrier", "jc", "ajc"].contains(&pulse.as_str()) {
                return Err(invalid("pulse", &pulse, "expected carrier, jc or ajc"));
            }
            let area = r.f64("area")?;
            let phi = r.f64_or("phi", 0.0)?;
            if n0 > n_max {
                return Err(invalid("n0", n0, "exceeds n_max"));
            }
            Kind::PulseDemo {
                n_max,
                n0,
                spin,
                pulse,
                params: PulseParams::new(area, phi).map_err(|e| invalid("area", area, &e.to_string()))?,
            }
        }
    })
}

fn add_derived(kind: &Kind, resolved: &mut Resolved) {
    match kind {
        Kind::Ajc { phys, .. } | Kind::AjcOracle { phys, .. } => {
            resolved.add_derived("g_rad_s", phys.g);
            resolved.add_derived("gamma_per_s", phys.gamma);
        }
        Kind::Heuristic { params, .. } => resolved.add_derived("rabi_rad_s", params.rabi()),
        _ => {}
    }
}
