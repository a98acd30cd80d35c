//! Scenario files: a small INI dialect with `[section]` headers, `key = value`
//! lines and `#` or `;` comments. Every key is optional; unknown keys and
//! repeated keys are errors reported with their line number.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use bll_core::grid::{Grid, ScalarField, Staggering, WallValues};
use bll_core::nsf::{Integrator, NsfScenario, NSF_CFL_MAX};
use bll_core::ob::{harmonic_extension, velocity_from_streamfunction, Frame, ObScenario};
use bll_core::thermo::{ob_coefficients, EosParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    pub nz: usize,
    pub lx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConfig {
    pub rho_bar: f64,
    pub theta_bar: f64,
}

/// Gravity and wall data. Each wall is `constant + cosine·cos(2πx/Lx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingConfig {
    pub g: f64,
    pub theta_b_bottom: f64,
    pub theta_b_top: f64,
    pub theta_b_cosine: f64,
}

/// Initial temperature: harmonic extension of the walls plus
/// `(bump + amplitude·cos(2π·mode·x/Lx))·sin(πz)`; stream function
/// `stream·sin(2π·mode·x/Lx)·sin²(πz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConfig {
    pub bump: f64,
    pub amplitude: f64,
    pub stream: f64,
    pub mode: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpsSpec {
    Single(f64),
    List(Vec<f64>),
}

impl EpsSpec {
    /// The value used by single-run commands: the given ε, or the smallest
    /// of a list.
    pub fn single(&self) -> f64 {
        match self {
            EpsSpec::Single(e) => *e,
            EpsSpec::List(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn list(&self) -> Vec<f64> {
        match self {
            EpsSpec::Single(e) => vec![*e],
            EpsSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsfConfig {
    pub eps: EpsSpec,
    pub cfl: f64,
    pub t_end: f64,
    pub integrator: Integrator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObConfig {
    pub frame: Frame,
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub dat: bool,
    pub bllf: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Snapshot interval shared by both solvers.
    pub cadence: f64,
    pub formats: Formats,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub eos: EosParams,
    pub grid: GridConfig,
    pub reference: ReferenceConfig,
    pub forcing: ForcingConfig,
    pub initial: InitialConfig,
    pub nsf: NsfConfig,
    pub ob: ObConfig,
    pub output: OutputConfig,
    /// Line of every key that was set, for late validation messages.
    lines: HashMap<(String, String), usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            eos: EosParams::default(),
            grid: GridConfig { nx: 64, nz: 32, lx: 2.0 },
            reference: ReferenceConfig { rho_bar: 1.0, theta_bar: 1.0 },
            forcing: ForcingConfig { g: 1.0, theta_b_bottom: 0.5, theta_b_top: -0.5, theta_b_cosine: 0.0 },
            initial: InitialConfig { bump: 0.0, amplitude: 0.2, stream: 0.0, mode: 1 },
            nsf: NsfConfig { eps: EpsSpec::Single(0.1), cfl: 0.4, t_end: 0.25, integrator: Integrator::SspRk3 },
            ob: ObConfig { frame: Frame::T, dt: 1e-3, t_end: 0.25 },
            output: OutputConfig {
                directory: PathBuf::from("out"),
                cadence: 0.05,
                formats: Formats { csv: true, dat: true, bllf: true },
            },
            lines: HashMap::new(),
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("eos", &["p_inf", "a", "s0", "mu0", "eta0", "kappa0", "beta"]),
    ("grid", &["nx", "nz", "lx"]),
    ("reference", &["rho_bar", "theta_bar"]),
    ("forcing", &["g", "theta_b_bottom", "theta_b_top", "theta_b_cosine"]),
    ("initial", &["bump", "amplitude", "stream", "mode"]),
    ("nsf", &["eps", "eps_list", "cfl", "t_end", "integrator"]),
    ("ob", &["frame", "dt", "t_end"]),
    ("output", &["directory", "cadence", "formats"]),
];

fn err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config { line: Some(line), msg: msg.into() }
}

fn number(v: &str, line: usize) -> Result<f64, CliError> {
    let x: f64 = v.parse().map_err(|_| err(line, format!("expected a number, found '{v}'")))?;
    if !x.is_finite() {
        return Err(err(line, format!("expected a finite number, found '{v}'")));
    }
    Ok(x)
}

fn count(v: &str, line: usize) -> Result<usize, CliError> {
    v.parse().map_err(|_| err(line, format!("expected a non-negative integer, found '{v}'")))
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::default();
    let mut section: Option<String> = None;
    let mut eps_single: Option<f64> = None;
    let mut eps_list: Option<Vec<f64>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, format!("malformed section header '{content}'")))?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            cfg.lines.insert((name.to_string(), String::new()), line);
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(line, format!("expected 'key = value', found '{content}'")))?;
        let sec = section.as_deref().ok_or_else(|| err(line, "key outside of any section"))?;
        let known = KEYS.iter().find(|(s, _)| *s == sec).map_or(&[][..], |(_, k)| *k);
        if !known.contains(&key) {
            return Err(err(line, format!("unknown key '{key}' in [{sec}]")));
        }
        if cfg.lines.insert((sec.to_string(), key.to_string()), line).is_some() {
            return Err(err(line, format!("duplicate key '{key}' in [{sec}]")));
        }
        match (sec, key) {
            ("eos", "p_inf") => cfg.eos.p_inf = number(value, line)?,
            ("eos", "a") => cfg.eos.a = number(value, line)?,
            ("eos", "s0") => cfg.eos.s0 = number(value, line)?,
            ("eos", "mu0") => cfg.eos.mu0 = number(value, line)?,
            ("eos", "eta0") => cfg.eos.eta0 = number(value, line)?,
            ("eos", "kappa0") => cfg.eos.kappa0 = number(value, line)?,
            ("eos", "beta") => cfg.eos.beta = number(value, line)?,
            ("grid", "nx") => cfg.grid.nx = count(value, line)?,
            ("grid", "nz") => cfg.grid.nz = count(value, line)?,
            ("grid", "lx") => cfg.grid.lx = number(value, line)?,
            ("reference", "rho_bar") => cfg.reference.rho_bar = number(value, line)?,
            ("reference", "theta_bar") => cfg.reference.theta_bar = number(value, line)?,
            ("forcing", "g") => cfg.forcing.g = number(value, line)?,
            ("forcing", "theta_b_bottom") => cfg.forcing.theta_b_bottom = number(value, line)?,
            ("forcing", "theta_b_top") => cfg.forcing.theta_b_top = number(value, line)?,
            ("forcing", "theta_b_cosine") => cfg.forcing.theta_b_cosine = number(value, line)?,
            ("initial", "bump") => cfg.initial.bump = number(value, line)?,
            ("initial", "amplitude") => cfg.initial.amplitude = number(value, line)?,
            ("initial", "stream") => cfg.initial.stream = number(value, line)?,
            ("initial", "mode") => cfg.initial.mode = count(value, line)?,
            ("nsf", "eps") => eps_single = Some(number(value, line)?),
            ("nsf", "eps_list") => {
                eps_list = Some(value.split(',').map(|v| number(v.trim(), line)).collect::<Result<_, _>>()?)
            }
            ("nsf", "cfl") => cfg.nsf.cfl = number(value, line)?,
            ("nsf", "t_end") => cfg.nsf.t_end = number(value, line)?,
            ("nsf", "integrator") => {
                cfg.nsf.integrator = match value {
                    "rk2" => Integrator::SspRk2,
                    "rk3" => Integrator::SspRk3,
                    _ => return Err(err(line, format!("integrator must be rk2 or rk3, found '{value}'"))),
                }
            }
            ("ob", "frame") => {
                cfg.ob.frame = match value {
                    "T" => Frame::T,
                    "Theta" => Frame::Theta,
                    _ => return Err(err(line, format!("frame must be T or Theta, found '{value}'"))),
                }
            }
            ("ob", "dt") => cfg.ob.dt = number(value, line)?,
            ("ob", "t_end") => cfg.ob.t_end = number(value, line)?,
            ("output", "directory") => {
                if value.is_empty() {
                    return Err(err(line, "directory must not be empty"));
                }
                cfg.output.directory = PathBuf::from(value)
            }
            ("output", "cadence") => cfg.output.cadence = number(value, line)?,
            ("output", "formats") => {
                let mut f = Formats { csv: false, dat: false, bllf: false };
                for item in value.split(',').map(str::trim) {
                    match item {
                        "csv" => f.csv = true,
                        "dat" => f.dat = true,
                        "bllf" => f.bllf = true,
                        _ => return Err(err(line, format!("unknown output format '{item}'"))),
                    }
                }
                cfg.output.formats = f;
            }
            _ => unreachable!("key table and match arms agree"),
        }
    }

    cfg.nsf.eps = match (eps_single, eps_list) {
        (Some(_), Some(_)) => return Err(err(cfg.line("nsf", "eps_list"), "give either eps or eps_list, not both")),
        (Some(e), None) => EpsSpec::Single(e),
        (None, Some(v)) => EpsSpec::List(v),
        (None, None) => cfg.nsf.eps.clone(),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Line of a key, falling back to its section header and then to 0.
    pub fn line(&self, section: &str, key: &str) -> usize {
        self.lines
            .get(&(section.to_string(), key.to_string()))
            .or_else(|| self.lines.get(&(section.to_string(), String::new())))
            .copied()
            .unwrap_or(0)
    }

    fn check(&self, ok: bool, section: &str, key: &str, msg: impl Into<String>) -> Result<(), CliError> {
        if ok {
            Ok(())
        } else {
            Err(err(self.line(section, key), msg))
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let e = &self.eos;
        self.check(e.p_inf >= 0.0, "eos", "p_inf", "p_inf must be non-negative")?;
        self.check(e.a >= 0.0, "eos", "a", "a must be non-negative")?;
        self.check(e.mu0 > 0.0, "eos", "mu0", "mu0 must be positive")?;
        self.check(e.eta0 >= 0.0, "eos", "eta0", "eta0 must be non-negative")?;
        self.check(e.kappa0 > 0.0, "eos", "kappa0", "kappa0 must be positive")?;
        e.validate().map_err(|x| err(self.line("eos", "beta"), x.to_string()))?;

        let g = &self.grid;
        self.check(g.nx >= 2, "grid", "nx", "nx must be at least 2")?;
        self.check(g.nz >= 3, "grid", "nz", "nz must be at least 3")?;
        self.check(g.lx > 0.0, "grid", "lx", "lx must be positive")?;

        let r = &self.reference;
        self.check(r.rho_bar > 0.0, "reference", "rho_bar", "rho_bar must be positive")?;
        self.check(r.theta_bar > 0.0, "reference", "theta_bar", "theta_bar must be positive")?;
        ob_coefficients(r.rho_bar, r.theta_bar, e).map_err(|x| err(self.line("reference", "rho_bar"), x.to_string()))?;

        self.check(self.initial.mode >= 1, "initial", "mode", "mode must be at least 1")?;

        let key = if matches!(self.nsf.eps, EpsSpec::List(_)) { "eps_list" } else { "eps" };
        let list = self.nsf.eps.list();
        self.check(!list.is_empty(), "nsf", key, "eps_list must not be empty")?;
        for &x in &list {
            self.check(x > 0.0, "nsf", key, format!("eps must be positive, found {x}"))?;
        }
        self.check(list.windows(2).all(|p| p[1] < p[0]), "nsf", key, "eps_list must be strictly decreasing")?;
        self.check(
            self.nsf.cfl > 0.0 && self.nsf.cfl <= NSF_CFL_MAX,
            "nsf",
            "cfl",
            format!("cfl must lie in (0, {NSF_CFL_MAX}]"),
        )?;

        let cadence = self.output.cadence;
        self.check(cadence > 0.0, "output", "cadence", "cadence must be positive")?;
        let whole = |t: f64| {
            let q = t / cadence;
            t >= 0.0 && (q - q.round()).abs() <= 1e-9 * q.max(1.0)
        };
        self.check(whole(self.nsf.t_end), "nsf", "t_end", "t_end must be a non-negative multiple of the cadence")?;
        self.check(self.ob.dt > 0.0, "ob", "dt", "dt must be positive")?;
        self.check(whole(self.ob.t_end), "ob", "t_end", "t_end must be a non-negative multiple of the cadence")?;
        let f = &self.output.formats;
        self.check(f.csv || f.dat || f.bllf, "output", "formats", "at least one output format is required")?;
        Ok(())
    }

    /// The fully resolved configuration in the input dialect. Parsing the echo
    /// yields an equal configuration.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let e = &self.eos;
        let _ = writeln!(s, "[eos]\np_inf = {}\na = {}\ns0 = {}\nmu0 = {}\neta0 = {}\nkappa0 = {}\nbeta = {}", e.p_inf, e.a, e.s0, e.mu0, e.eta0, e.kappa0, e.beta);
        let g = &self.grid;
        let _ = writeln!(s, "\n[grid]\nnx = {}\nnz = {}\nlx = {}", g.nx, g.nz, g.lx);
        let r = &self.reference;
        let _ = writeln!(s, "\n[reference]\nrho_bar = {}\ntheta_bar = {}", r.rho_bar, r.theta_bar);
        let f = &self.forcing;
        let _ = writeln!(
            s,
            "\n[forcing]\ng = {}\ntheta_b_bottom = {}\ntheta_b_top = {}\ntheta_b_cosine = {}",
            f.g, f.theta_b_bottom, f.theta_b_top, f.theta_b_cosine
        );
        let i = &self.initial;
        let _ = writeln!(s, "\n[initial]\nbump = {}\namplitude = {}\nstream = {}\nmode = {}", i.bump, i.amplitude, i.stream, i.mode);
        let n = &self.nsf;
        let eps = match &n.eps {
            EpsSpec::Single(x) => format!("eps = {x}"),
            EpsSpec::List(v) => format!("eps_list = {}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")),
        };
        let integrator = match n.integrator {
            Integrator::SspRk2 => "rk2",
            Integrator::SspRk3 => "rk3",
        };
        let _ = writeln!(s, "\n[nsf]\n{eps}\ncfl = {}\nt_end = {}\nintegrator = {integrator}", n.cfl, n.t_end);
        let o = &self.ob;
        let frame = match o.frame {
            Frame::T => "T",
            Frame::Theta => "Theta",
        };
        let _ = writeln!(s, "\n[ob]\nframe = {frame}\ndt = {}\nt_end = {}", o.dt, o.t_end);
        let out = &self.output;
        let formats: Vec<&str> = [(out.formats.csv, "csv"), (out.formats.dat, "dat"), (out.formats.bllf, "bllf")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| *n)
            .collect();
        let _ = writeln!(
            s,
            "\n[output]\ndirectory = {}\ncadence = {}\nformats = {}",
            out.directory.display(),
            out.cadence,
            formats.join(", ")
        );
        s
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.nx, self.grid.nz, self.grid.lx).map_err(|e| err(self.line("grid", "nx"), e.to_string()))
    }

    pub fn walls(&self, grid: &Grid) -> WallValues {
        let f = self.forcing;
        let k = 2.0 * PI / grid.lx;
        WallValues::from_fn(grid, |x| {
            let c = f.theta_b_cosine * (k * x).cos();
            (f.theta_b_bottom + c, f.theta_b_top + c)
        })
    }

    /// Limit scenario ending at `t_end` with snapshots at the output cadence.
    pub fn ob_scenario(&self, t_end: f64) -> Result<ObScenario, CliError> {
        let grid = self.grid()?;
        let walls = self.walls(&grid);
        let i = self.initial;
        let k = 2.0 * PI * i.mode as f64 / grid.lx;
        let mut t0 = harmonic_extension(grid, &walls)?;
        t0.axpy(
            1.0,
            &ScalarField::from_fn(grid, Staggering::Center, |x, z| (i.bump + i.amplitude * (k * x).cos()) * (PI * z).sin()),
        )?;
        let u0 = velocity_from_streamfunction(grid, |x, z| i.stream * (k * x).sin() * (PI * z).sin().powi(2));
        Ok(ObScenario::new(grid, self.eos, self.reference.rho_bar, self.reference.theta_bar)
            .with_gravity(self.forcing.g)
            .with_walls(walls)
            .with_initial(t0, u0)
            .with_time(self.ob.dt, t_end, self.output.cadence))
    }

    /// Well-prepared compressible scenario at `eps` over the `[nsf]` horizon.
    pub fn nsf_scenario(&self, eps: f64) -> Result<NsfScenario, CliError> {
        let ob = self.ob_scenario(self.nsf.t_end)?;
        let mut sc = NsfScenario::well_prepared(&ob, eps, self.nsf.cfl)?;
        sc.integrator = self.nsf.integrator;
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.grid, GridConfig { nx: 64, nz: 32, lx: 2.0 });
        assert_eq!(c.nsf.eps, EpsSpec::Single(0.1));
        assert_eq!(parse_config(&c.echo()).unwrap().echo(), c.echo());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("[nsf]\n\neps = -0.1\n", 3),
            ("[grid]\nnx = 8\nwidth = 3\n", 3),
            ("[grid]\nnx = eight\n", 2),
            ("[bogus]\n", 1),
            ("nx = 4\n", 1),
            ("[nsf]\neps_list = 0.1, 0.2\n", 2),
            ("[nsf]\neps = 0.1\neps_list = 0.2, 0.1\n", 3),
            ("[grid]\nnx = 8\nnx = 8\n", 3),
            ("[ob]\nt_end = 0.33\n", 2),
            ("[eos]\nbeta = -1\n", 2),
            ("[output]\nformats = png\n", 2),
            ("[nsf]\ncfl = 0.9\n", 2),
        ];
        for (text, line) in cases {
            match parse_config(text) {
                Err(CliError::Config { line: Some(l), .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn cosine_forcing_round_trips() {
        let text = "[forcing]\ntheta_b_bottom = 1\ntheta_b_top = -1\ntheta_b_cosine = 0.5\n[nsf]\neps_list = 0.2, 0.1, 0.05\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.forcing.theta_b_cosine, 0.5);
        let again = parse_config(&c.echo()).unwrap();
        assert_eq!(again.forcing, c.forcing);
        assert_eq!(again.nsf, c.nsf);
        assert_eq!(again.echo(), c.echo());
        let g = c.grid().unwrap();
        let w = c.walls(&g);
        assert!((w.bottom[0] - (1.0 + 0.5 * (PI * g.dx / g.lx).cos())).abs() < 1e-15);
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse_config("# scenario\n[grid] \n  nx=16 ; narrow\nnz = 8 # short\n").unwrap();
        assert_eq!((c.grid.nx, c.grid.nz), (16, 8));
    }

    #[test]
    fn smallest_eps_is_the_single_value() {
        assert_eq!(EpsSpec::List(vec![0.2, 0.1, 0.05]).single(), 0.05);
    }
}
