//! Validated run description and its canonical string form.

use std::fmt::Write as _;
use std::path::PathBuf;

use tailquant::{ApproxMethod, CopulaParams, DistributionSpec, OracleConfig, TailKind, UGrid};

use crate::args::{Cli, CommandArgs, CommonArgs, DistArgs, DistName, GridArgs, SideArg};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Quantile,
    Compare,
    ErrorCurve,
    Ladder,
    TailDep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Quantile => "quantile",
            Command::Compare => "compare",
            Command::ErrorCurve => "error-curve",
            Command::Ladder => "ladder",
            Command::TailDep => "taildep",
        }
    }
}

/// Where the probability levels come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Default,
    Geometric { start: f64, end: f64, points: usize },
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    /// Absent for `taildep`.
    pub dist: Option<DistributionSpec>,
    pub side: TailKind,
    pub methods: Vec<ApproxMethod>,
    pub grid_spec: GridSpec,
    pub extended: bool,
    /// Tail masses resolved from `grid_spec`.
    pub grid: UGrid,
    pub rho: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub oracle: OracleConfig,
}

impl RunSpec {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        match cli.command {
            CommandArgs::Quantile { dist, u, method, extended, common } => {
                let (d, side) = parse_dist(&dist)?;
                if !(u > 0.0 && u < 1.0) {
                    return Err(invalid(format!("--u = {u} must lie in (0, 1)")));
                }
                let mass = match side {
                    TailKind::Lower => u,
                    TailKind::Upper => 1.0 - u,
                };
                if !(mass < 0.5) {
                    return Err(invalid(format!("--u = {u} is not in the {side} half")));
                }
                let grid_spec = GridSpec::List(vec![mass]);
                let grid = resolve_grid(&grid_spec, extended)?;
                Self::assemble(Command::Quantile, Some(d), side, vec![parse_method(&method)?], grid_spec, extended, grid, None, common)
            }
            CommandArgs::Compare { dist, grid, methods, common } => {
                let (d, side) = parse_dist(&dist)?;
                let methods = methods.iter().map(|m| parse_method(m)).collect::<Result<Vec<_>, _>>()?;
                if methods.is_empty() {
                    return Err(invalid("--methods needs at least one method".into()));
                }
                let (grid_spec, ugrid) = parse_grid(&grid)?;
                Self::assemble(Command::Compare, Some(d), side, methods, grid_spec, grid.extended, ugrid, None, common)
            }
            CommandArgs::ErrorCurve { dist, grid, method, common } => {
                let (d, side) = parse_dist(&dist)?;
                let (grid_spec, ugrid) = parse_grid(&grid)?;
                let methods = vec![parse_method(&method)?];
                Self::assemble(Command::ErrorCurve, Some(d), side, methods, grid_spec, grid.extended, ugrid, None, common)
            }
            CommandArgs::Ladder { dist, grid, common } => {
                let (d, side) = parse_dist(&dist)?;
                let (grid_spec, ugrid) = parse_grid(&grid)?;
                Self::assemble(Command::Ladder, Some(d), side, Vec::new(), grid_spec, grid.extended, ugrid, None, common)
            }
            CommandArgs::Taildep { rho, grid, common } => {
                CopulaParams::new(rho)?;
                let (grid_spec, ugrid) = parse_grid(&grid)?;
                Self::assemble(
                    Command::TailDep,
                    None,
                    TailKind::Lower,
                    Vec::new(),
                    grid_spec,
                    grid.extended,
                    ugrid,
                    Some(rho),
                    common,
                )
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        command: Command,
        dist: Option<DistributionSpec>,
        side: TailKind,
        methods: Vec<ApproxMethod>,
        grid_spec: GridSpec,
        extended: bool,
        grid: UGrid,
        rho: Option<f64>,
        common: CommonArgs,
    ) -> Result<Self, CliError> {
        if let Some(d) = &dist {
            if !d.supports(side) {
                return Err(invalid(format!("{d} has no {side} tail model")));
            }
        }
        let mut oracle = OracleConfig::default();
        if let Some(v) = common.abs_tol {
            oracle.abs_tol = v;
        }
        if let Some(v) = common.rel_tol {
            oracle.rel_tol = v;
        }
        if let Some(v) = common.root_tol {
            oracle.root_tol = v;
        }
        if let Some(v) = common.max_iter {
            oracle.max_iter = v;
        }
        oracle.seed_bracket = !common.no_seed;
        oracle.validate()?;
        Ok(RunSpec { command, dist, side, methods, grid_spec, extended, grid, rho, output_path: common.output, oracle })
    }

    /// Stable one-line description of every resolved setting. The output
    /// path is left out so the same study written to different files
    /// carries the same header.
    pub fn canonical(&self) -> String {
        let mut s = format!("command={}", self.command.name());
        if let Some(d) = &self.dist {
            let _ = write!(s, " dist={} side={}", canonical_dist(d), self.side);
        }
        if let Some(rho) = self.rho {
            let _ = write!(s, " rho={rho:e}");
        }
        if !self.methods.is_empty() {
            let labels: Vec<String> = self.methods.iter().map(|m| m.label()).collect();
            let _ = write!(s, " methods={}", labels.join(","));
        }
        let grid = match &self.grid_spec {
            GridSpec::Default if self.extended => "default-extended".to_string(),
            GridSpec::Default => "default".to_string(),
            GridSpec::Geometric { start, end, points } => format!("{start:e}:{end:e}:{points}"),
            GridSpec::List(v) => v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(","),
        };
        let _ = write!(s, " grid={grid} extended={}", self.extended);
        let o = &self.oracle;
        let _ = write!(
            s,
            " abs_tol={:e} rel_tol={:e} root_tol={:e} max_iter={} seed={}",
            o.abs_tol, o.rel_tol, o.root_tol, o.max_iter, o.seed_bracket
        );
        s
    }
}

fn canonical_dist(d: &DistributionSpec) -> String {
    match *d {
        DistributionSpec::Normal => "normal".to_string(),
        DistributionSpec::SkewNormal { lambda } => format!("skew-normal(lambda={lambda:e})"),
        DistributionSpec::Gamma { alpha, beta } => format!("gamma(alpha={alpha:e},beta={beta:e})"),
        DistributionSpec::VarianceGamma { theta, nu } => format!("variance-gamma(theta={theta:e},nu={nu:e})"),
        DistributionSpec::SkewSlash { theta, lambda } => format!("skew-slash(theta={theta:e},lambda={lambda:e})"),
    }
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

fn parse_method(s: &str) -> Result<ApproxMethod, CliError> {
    Ok(s.parse::<ApproxMethod>()?)
}

fn parse_dist(a: &DistArgs) -> Result<(DistributionSpec, TailKind), CliError> {
    let given = [("lambda", a.lambda), ("alpha", a.alpha), ("beta", a.beta), ("theta", a.theta), ("nu", a.nu)];
    let wanted: &[&str] = match a.dist {
        DistName::Normal => &[],
        DistName::SkewNormal => &["lambda"],
        DistName::Gamma => &["alpha", "beta"],
        DistName::VarianceGamma => &["theta", "nu"],
        DistName::SkewSlash => &["theta", "lambda"],
    };
    for (name, value) in given {
        if value.is_some() && !wanted.contains(&name) {
            return Err(invalid(format!("--{name} does not apply to {:?}", a.dist)));
        }
    }
    let need = |name: &str| -> Result<f64, CliError> {
        given
            .iter()
            .find(|(n, _)| *n == name)
            .and_then(|(_, v)| *v)
            .ok_or_else(|| invalid(format!("--{name} is required for {:?}", a.dist)))
    };
    let dist = match a.dist {
        DistName::Normal => DistributionSpec::Normal,
        DistName::SkewNormal => DistributionSpec::skew_normal(need("lambda")?)?,
        DistName::Gamma => DistributionSpec::gamma(need("alpha")?, need("beta")?)?,
        DistName::VarianceGamma => DistributionSpec::variance_gamma(need("theta")?, need("nu")?)?,
        DistName::SkewSlash => DistributionSpec::skew_slash(need("theta")?, need("lambda")?)?,
    };
    let side = match a.side {
        SideArg::Lower => TailKind::Lower,
        SideArg::Upper => TailKind::Upper,
    };
    Ok((dist, side))
}

fn parse_grid(a: &GridArgs) -> Result<(GridSpec, UGrid), CliError> {
    let spec = match (&a.grid, &a.u_list) {
        (Some(g), _) => {
            let parts: Vec<&str> = g.split(':').collect();
            if parts.len() != 3 {
                return Err(invalid(format!("--grid '{g}' is not start:end:points")));
            }
            let num = |p: &str| p.trim().parse::<f64>().map_err(|_| invalid(format!("bad grid endpoint '{p}'")));
            let points =
                parts[2].trim().parse::<usize>().map_err(|_| invalid(format!("bad grid point count '{}'", parts[2])))?;
            GridSpec::Geometric { start: num(parts[0])?, end: num(parts[1])?, points }
        }
        (None, Some(list)) => GridSpec::List(list.clone()),
        (None, None) => GridSpec::Default,
    };
    let grid = resolve_grid(&spec, a.extended)?;
    Ok((spec, grid))
}

fn resolve_grid(spec: &GridSpec, extended: bool) -> Result<UGrid, CliError> {
    Ok(match spec {
        GridSpec::Default if extended => UGrid::extended(),
        GridSpec::Default => UGrid::default(),
        GridSpec::Geometric { start, end, points } => UGrid::geometric(*start, *end, *points, extended)?,
        GridSpec::List(v) => UGrid::from_list(v, extended)?,
    })
}
