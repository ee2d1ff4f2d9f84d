//! Command implementations behind the `hatcat` binary.
//!
//! Every command writes a CSV with a header row, plus a JSON sidecar where it
//! has more than a table to report. Exit codes: 0 success, 1 usage or input
//! error, 2 numerical failure.

pub mod args;
pub mod runfile;

use std::fs;
use std::path::{Path, PathBuf};

use hatcat::detection::grid_angle;
use hatcat::eigen::EigenOptions;
use hatcat::hubbard::solve;
use hatcat::number::{phases_from_relative, MIN_FRINGE_CONTRAST};
use hatcat::{
    coherent_pattern, find_cat_peaks, fringe_analysis, hat_distribution, number_distribution, pattern_swap_check,
    phase_distribution, quasimomentum_profile, run_sequence, swap_asymmetry, symmetric_swap, Boundary, CatPeaks,
    EtaDistribution, FringeReport, HamiltonianParams, QuantumState, QuasiMomentumParams, RunOptions, SimplexGrid,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use args::{Cli, Command};
use args::{CoherentArgs, DetectArgs, GroundArgs, HatArgs, NumberArgs, PhaseArgs};
use runfile::{RunConfig, RunFile};

/// Largest pattern change still reported as invariant by `coherent`.
pub const SWAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] hatcat::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Input(_) => 1,
            Self::Output(_) => 2,
            Self::Core(e) => match e {
                hatcat::Error::InvalidArgument(_)
                | hatcat::Error::BasisMismatch(_)
                | hatcat::Error::DimensionOverflow { .. } => 1,
                _ => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Hat(a) => cmd_hat(a).map(|_| ()),
        Command::Ground(a) => cmd_ground(a).map(|_| ()),
        Command::Detect(a) => cmd_detect(a).map(|_| ()),
        Command::Phase(a) => cmd_phase(a).map(|_| ()),
        Command::Number(a) => cmd_number(a).map(|_| ()),
        Command::Coherent(a) => cmd_coherent(a).map(|_| ()),
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    write_text(path, &s)
}

/// `dir/name.csv` → `dir/name.<suffix>`.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    write_text(path, &String::from_utf8(bytes).expect("ascii csv"))
}

/// Shortest round-trip decimal, switching to exponent form for very small or large magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn write_simplex(path: &Path, header: &[&str; 3], grid: &SimplexGrid) -> Result<()> {
    write_csv(
        path,
        header,
        grid.cells()
            .map(|(x, y, p)| vec![x.to_string(), y.to_string(), fmt_num(p)]),
    )
}

fn require_three_sites(sites: usize, what: &str) -> Result<()> {
    if sites != 3 {
        return Err(CliError::Usage(format!(
            "{what} is a two-dimensional projection defined for 3 sites, got {sites}"
        )));
    }
    Ok(())
}

pub fn cmd_hat(a: &HatArgs) -> Result<SimplexGrid> {
    require_three_sites(a.sites, "the hat distribution")?;
    let grid = hat_distribution(a.atoms_per_site, a.xi)?;
    write_simplex(&a.out, &["N_alpha", "N_beta", "probability"], &grid)?;
    eprintln!("wrote {} rows to {}", grid.cells().count(), a.out.display());
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundMeta {
    pub sites: usize,
    pub atoms: u32,
    pub u_over_j: f64,
    pub hopping: f64,
    pub interaction: f64,
    pub boundary: Boundary,
    pub xi: f64,
    pub dim: usize,
    pub energy: f64,
    pub residual: f64,
    pub gap: Option<f64>,
    pub near_degenerate: bool,
    pub iterations: usize,
}

/// Output path for one U/J value of a `ground` sweep.
pub fn ground_output(out: &Path, uj: f64, several: bool) -> PathBuf {
    if !several {
        return out.to_path_buf();
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = out
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_uj{uj}{ext}"))
}

pub fn cmd_ground(a: &GroundArgs) -> Result<Vec<(GroundMeta, SimplexGrid)>> {
    require_three_sites(a.sites, "the quasi-momentum profile")?;
    if a.uj.is_empty() {
        return Err(CliError::Usage("--uj needs at least one value".into()));
    }
    let boundary: Boundary = a.boundary.parse()?;
    let several = a.uj.len() > 1;
    let results: Vec<Result<(GroundMeta, SimplexGrid)>> =
        a.uj.par_iter()
            .map(|&uj| {
                let params = HamiltonianParams::from_ratio(a.sites, a.atoms, uj, boundary)?;
                let g = solve(&params, &EigenOptions::default())?;
                let profile = quasimomentum_profile(&g.state, QuasiMomentumParams::new(a.sites, a.xi))?;
                let meta = GroundMeta {
                    sites: a.sites,
                    atoms: a.atoms,
                    u_over_j: uj,
                    hopping: params.hopping,
                    interaction: params.interaction,
                    boundary,
                    xi: a.xi,
                    dim: g.state.basis().dim(),
                    energy: g.energy,
                    residual: g.residual,
                    gap: g.gap,
                    near_degenerate: g.near_degenerate,
                    iterations: g.iterations,
                };
                let out = ground_output(&a.out, uj, several);
                write_simplex(&out, &["N_alpha", "N_beta", "probability"], &profile)?;
                write_json(&sidecar_path(&out, "meta.json"), &meta)?;
                Ok((meta, profile))
            })
            .collect();
    let mut done = Vec::with_capacity(results.len());
    for r in results {
        let (meta, profile) = r?;
        eprintln!(
            "U/J = {}: E0 = {:.12}, residual {:.2e}{}",
            meta.u_over_j,
            meta.energy,
            meta.residual,
            if meta.near_degenerate { ", near-degenerate" } else { "" }
        );
        done.push((meta, profile));
    }
    Ok(done)
}

pub fn cmd_detect(a: &DetectArgs) -> Result<RunFile> {
    let eta: EtaDistribution = a.eta_dist.parse()?;
    if a.grid_points < 2 {
        return Err(CliError::Usage("--grid-points must be at least 2".into()));
    }
    let start = QuantumState::uniform_fock(a.sites, a.atoms_per_site)?;
    let opts = RunOptions {
        eta: eta.clone(),
        grid_points: a.grid_points,
    };
    let run = run_sequence(&start, a.detections, &opts, a.seed)?;
    let config = RunConfig {
        sites: a.sites,
        atoms_per_site: a.atoms_per_site,
        detections: a.detections,
        eta_dist: eta.to_string(),
        grid_points: a.grid_points,
    };
    let file = RunFile::new(config, &run);
    file.write(&a.out)?;
    eprintln!(
        "wrote {} detections, final sector {} atoms, to {}",
        file.events.len(),
        file.final_state.total_atoms,
        a.out.display()
    );
    Ok(file)
}

fn load_three_mode(path: &Path) -> Result<QuantumState> {
    let state = RunFile::read(path)?.final_state()?;
    if state.n_modes() != 3 {
        return Err(CliError::Usage(format!(
            "phase and number analysis need a 3-mode run, {} has {}",
            path.display(),
            state.n_modes()
        )));
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeaksReport {
    pub grid: usize,
    pub swap_asymmetry: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub peak_height: f64,
    pub mirror_height: f64,
    pub separation: f64,
    pub degenerate: bool,
    pub partner: Option<[f64; 3]>,
}

impl PeaksReport {
    fn new(grid: usize, asym: f64, p: &CatPeaks) -> Self {
        Self {
            grid,
            swap_asymmetry: asym,
            phi1: p.phi1,
            phi2: p.phi2,
            peak_height: p.peak_height,
            mirror_height: p.mirror_height,
            separation: p.separation,
            degenerate: p.degenerate,
            partner: p.partner.map(|(x, y, h)| [x, y, h]),
        }
    }
}

/// Writes the grid, then the peak report. A grid without cat structure is
/// still written before the error is returned.
pub fn cmd_phase(a: &PhaseArgs) -> Result<PeaksReport> {
    let state = load_three_mode(&a.run)?;
    let grid = phase_distribution(&state, a.grid)?;
    let m = grid.size();
    let rows = (0..m).flat_map(|i| {
        let g = &grid;
        (0..m).map(move |j| vec![fmt_num(g.angle(i)), fmt_num(g.angle(j)), fmt_num(g.get(i, j))])
    });
    write_csv(&a.out, &["phi_ba", "phi_cb", "probability"], rows)?;
    let asym = swap_asymmetry(&grid);
    println!("swap_asymmetry {asym:e}");
    let peaks = find_cat_peaks(&grid)?;
    let report = PeaksReport::new(m, asym, &peaks);
    write_json(&sidecar_path(&a.out, "peaks.json"), &report)?;
    println!(
        "peaks ({:.6}, {:.6}) height {:.4}{}",
        peaks.phi1,
        peaks.phi2,
        peaks.peak_height,
        if peaks.degenerate { ", on the swap diagonal" } else { "" }
    );
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumberReport {
    pub phi1: f64,
    pub phi2: f64,
    pub predicted_frequency: f64,
    pub measured_frequency_b: f64,
    pub frequency_error_bins: f64,
    pub min_contrast: f64,
    pub fringe: FringeReport,
}

/// `Ok(None)` when the state carries no cat structure (for example a Fock
/// state): the distribution is written and no fringe report is produced.
pub fn cmd_number(a: &NumberArgs) -> Result<Option<NumberReport>> {
    let state = load_three_mode(&a.run)?;
    let dist = number_distribution(&state)?;
    write_simplex(&a.out, &["N_a", "N_b", "probability"], &dist)?;
    let grid = phase_distribution(&state, a.grid)?;
    let peaks = match find_cat_peaks(&grid) {
        Ok(p) => p,
        Err(hatcat::Error::NoCatStructure { ratio }) => {
            eprintln!("no cat structure (peak/mean {ratio:.3}); fringe report skipped");
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    let fringe = fringe_analysis(&dist, &peaks)?;
    let report = NumberReport {
        phi1: peaks.phi1,
        phi2: peaks.phi2,
        predicted_frequency: fringe.predicted_frequency,
        measured_frequency_b: fringe.dominant_frequency_b,
        frequency_error_bins: fringe.frequency_error_bins(),
        min_contrast: MIN_FRINGE_CONTRAST,
        fringe,
    };
    write_json(&sidecar_path(&a.out, "fringe.json"), &report)?;
    println!(
        "fringe frequency along N_b: predicted {:.6}, measured {:.6} ({:.2} bins); along N_a: {:.6}",
        report.predicted_frequency,
        report.measured_frequency_b,
        report.frequency_error_bins,
        report.fringe.dominant_frequency_a
    );
    Ok(Some(report))
}

pub fn parse_swap(s: &str, n_modes: usize) -> Result<(usize, usize)> {
    if s == "first-last" {
        return Ok(symmetric_swap(n_modes));
    }
    let (i, j) = s
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("--swap '{s}' is neither 'first-last' nor 'I,J'")))?;
    let idx = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("--swap index '{t}' is not a non-negative integer")))
    };
    Ok((idx(i)?, idx(j)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapVerdict {
    pub relative_phases: Vec<f64>,
    pub f_value: f64,
    pub swap: (usize, usize),
    pub max_difference: f64,
    pub invariant: bool,
}

pub fn cmd_coherent(a: &CoherentArgs) -> Result<SwapVerdict> {
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let phases = phases_from_relative(&a.phases);
    let swap = parse_swap(&a.swap, phases.len())?;
    let max_difference = pattern_swap_check(&phases, a.f_value, a.grid, swap)?;
    let mut rows = Vec::with_capacity(a.grid);
    for i in 0..a.grid {
        let u = grid_angle(i, a.grid);
        rows.push(vec![fmt_num(u), fmt_num(coherent_pattern(&phases, a.f_value, u)?)]);
    }
    write_csv(&a.out, &["u", "probability"], rows)?;
    let verdict = SwapVerdict {
        relative_phases: a.phases.clone(),
        f_value: a.f_value,
        swap,
        max_difference,
        invariant: max_difference < SWAP_TOLERANCE,
    };
    write_json(&sidecar_path(&a.out, "swap.json"), &verdict)?;
    println!(
        "swap {:?}: max difference {:e} ({})",
        swap,
        max_difference,
        if verdict.invariant { "invariant" } else { "changed" }
    );
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            0.22222222222222213,
            1.5521568736987468e-32,
            -3.0e20,
            0.1 + 0.2,
            -0.0,
        ] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(2.5e-9), "2.5e-9");
    }

    #[test]
    fn sweep_names() {
        let p = Path::new("out/ground.csv");
        assert_eq!(ground_output(p, 50.0, false), p);
        assert_eq!(ground_output(p, 50.0, true), Path::new("out/ground_uj50.csv"));
        assert_eq!(ground_output(p, 0.5, true), Path::new("out/ground_uj0.5.csv"));
        assert_eq!(
            sidecar_path(Path::new("a/b.csv"), "meta.json"),
            Path::new("a/b.meta.json")
        );
    }

    #[test]
    fn swap_parsing() {
        assert_eq!(parse_swap("first-last", 4).unwrap(), (0, 2));
        assert_eq!(parse_swap("0, 1", 4).unwrap(), (0, 1));
        assert!(parse_swap("0", 4).is_err());
        assert!(parse_swap("a,b", 4).is_err());
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(
            CliError::from(hatcat::Error::InvalidArgument("x".into())).exit_code(),
            1
        );
        assert_eq!(
            CliError::from(hatcat::Error::NoCatStructure { ratio: 1.0 }).exit_code(),
            2
        );
        assert_eq!(
            CliError::from(hatcat::Error::NoConvergence {
                iterations: 1,
                residual: 1.0
            })
            .exit_code(),
            2
        );
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }
}
