//! The `nlos-ltm` command-line pipeline.
//!
//! Every stage reads a JSON run configuration and writes its artifacts into
//! the configured output directory:
//!
//! | stage | reads | writes |
//! |---|---|---|
//! | `simulate` | scene | impulse (NLIR) |
//! | `direct` | impulse | `direct.nlvx`, `direct.pgm` |
//! | `mask` | `direct.nlvx` | `mask.nlvx`, `mask.pgm` |
//! | `column` | impulse | `column_<i>_<j>_<k>.nlvx`, `.pgm` |
//! | `indirect-all` | impulse, `mask.nlvx` | `indirect.nlvx`, `indirect.pgm` |
//! | `ltm` | impulse (and `mask.nlvx` with `--masked`) | `ltm.csv`, `ltm.nltm` |
//! | `bands` | `ltm.nltm` | `band_<n>.csv`, `band_<n>.nltm` |
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
//! 3 malformed input file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, FormatError, Result};
use crate::io::{self, RunConfig, Volume, VolumeKind};
use crate::ltm::{band_decompose, occupancy_from_direct, Interval, LtmEngine};
use crate::phasor::GateKind;
use crate::sim::{simulate_impulse_response, ImpulseResponse};

#[derive(Debug, Parser)]
#[command(name = "nlos-ltm", version, about = "Virtual light transport matrices for NLOS captures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(short, long)]
    config: PathBuf,
    /// Worker threads; overrides the configuration.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GateArg {
    TwoBounce,
    Higher,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the configured scene into an NLIR impulse response.
    Simulate(Common),
    /// Describe an NLIR, NLVX or NLTM file.
    Info { path: PathBuf },
    /// Direct image: focus light and camera on every voxel.
    Direct(Common),
    /// Occupancy mask from the direct image.
    Mask(Common),
    /// One transport matrix column: light focused at a voxel, imaged everywhere.
    Column {
        #[command(flatten)]
        common: Common,
        /// Source voxel as grid indices `i,j,k`.
        #[arg(long, value_parser = parse_focus)]
        focus: [usize; 3],
        #[arg(long, value_enum)]
        gate: Option<GateArg>,
    },
    /// In-focus indirect light over the occupied voxels.
    IndirectAll(Common),
    /// Assemble the transport matrix for the configured sources.
    Ltm {
        #[command(flatten)]
        common: Common,
        /// Restrict sources and destinations to occupied voxels.
        #[arg(long)]
        masked: bool,
    },
    /// Split the assembled matrix by source-destination distance.
    Bands {
        #[command(flatten)]
        common: Common,
        /// Comma separated `min:max` intervals in meters; an empty max is unbounded.
        #[arg(long, value_parser = parse_intervals)]
        intervals: Option<Intervals>,
    },
}

#[derive(Debug, Clone)]
struct Intervals(Vec<Interval>);

fn parse_focus(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected i,j,k, got {s:?}"));
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("{p:?} is not a voxel index"))?;
    }
    Ok(out)
}

fn parse_intervals(s: &str) -> std::result::Result<Intervals, String> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| format!("interval {part:?} is not min:max"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?;
            let hi: f64 = match hi.trim() {
                "" => f64::INFINITY,
                h => h.parse().map_err(|_| format!("bad bound {h:?}"))?,
            };
            Interval::new(lo, hi).map_err(|e| e.to_string())
        })
        .collect::<std::result::Result<_, _>>()
        .map(Intervals)
}

/// Run the CLI and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 1,
        Error::InvalidScene(_) | Error::InvalidArgument(_) | Error::Config(_) => 2,
        Error::Format { .. } => 3,
    }
}

struct Stage {
    cfg: RunConfig,
    pool: rayon::ThreadPool,
}

impl Stage {
    fn open(common: &Common) -> Result<Self> {
        let cfg = io::load_run_config(&common.config)?;
        let threads = common.threads.unwrap_or(cfg.threads);
        if threads == 0 {
            return Err(Error::Config("threads: must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("threads: {e}")))?;
        std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
        Ok(Stage { cfg, pool })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn impulse(&self) -> Result<ImpulseResponse> {
        io::read_nlir(&self.cfg.impulse)
    }

    fn with_engine<R: Send>(&self, f: impl FnOnce(&LtmEngine) -> Result<R> + Send) -> Result<R> {
        let h = self.impulse()?;
        let grid = self.cfg.voxel_grid()?;
        let params = self.cfg.wave_params(&h.topology)?;
        let engine = LtmEngine::new(&h, &grid, &params)?;
        self.pool.install(|| f(&engine))
    }

    fn save_volume(&self, v: &Volume, stem: &str) -> Result<()> {
        let path = self.out(&format!("{stem}.nlvx"));
        io::write_volume(v, &path)?;
        io::export_image(&v.values, &v.grid, self.cfg.projection_axis, &self.out(&format!("{stem}.pgm")))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn load_volume(&self, stem: &str, kind: VolumeKind) -> Result<Volume> {
        let path = self.out(&format!("{stem}.nlvx"));
        let v = io::read_volume(&path)?;
        if v.kind != kind {
            return Err(Error::format(
                &path,
                FormatError::Malformed(format!("expected a {kind:?} volume, found {:?}", v.kind)),
            ));
        }
        if v.grid != self.cfg.voxel_grid()? {
            return Err(Error::Config(format!(
                "grid: {} was computed on a different voxel grid",
                path.display()
            )));
        }
        Ok(v)
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Info { path } => info(&path),
        Command::Simulate(c) => {
            let st = Stage::open(&c)?;
            let scene_path = st
                .cfg
                .scene
                .clone()
                .ok_or_else(|| Error::Config("scene: required by simulate".into()))?;
            let scene = io::load_scene(&scene_path)?;
            let (h, report) = st.pool.install(|| simulate_impulse_response(&scene))?;
            io::write_nlir(&h, &st.cfg.impulse)?;
            println!(
                "simulated {} paths ({} outside the time window)",
                report.deposited, report.truncated
            );
            println!("wrote {}", st.cfg.impulse.display());
            Ok(())
        }
        Command::Direct(c) => {
            let st = Stage::open(&c)?;
            let img = st.with_engine(|e| Ok(e.compute_direct()))?;
            let peak = img.grid.coords(img.argmax());
            println!("direct image max {:e} at voxel {peak:?}", img.max());
            st.save_volume(&Volume::from_direct(&img), "direct")
        }
        Command::Mask(c) => {
            let st = Stage::open(&c)?;
            let img = st
                .load_volume("direct", VolumeKind::Direct)?
                .into_direct()
                .map_err(|e| Error::format(st.out("direct.nlvx"), e))?;
            let eps = st.cfg.threshold()?.resolve(&img)?;
            let mask = occupancy_from_direct(&img, eps)?;
            println!("{} of {} voxels occupied (epsilon {eps:e})", mask.count(), img.grid.len());
            st.save_volume(&Volume::from_mask(&mask), "mask")
        }
        Command::Column { common, focus, gate } => {
            let st = Stage::open(&common)?;
            let grid = st.cfg.voxel_grid()?;
            if (0..3).any(|d| focus[d] >= grid.counts[d]) {
                return Err(Error::InvalidArgument(format!(
                    "focus {focus:?} is outside a grid of {:?} voxels",
                    grid.counts
                )));
            }
            let kind = match gate {
                Some(GateArg::TwoBounce) => GateKind::Gaussian,
                Some(GateArg::Higher) => GateKind::HigherOrderComplement,
                None => st.cfg.gate,
            };
            let a = grid.index(focus[0], focus[1], focus[2]);
            let values = st.with_engine(|e| e.compute_column(a, kind))?;
            let v = Volume {
                kind: VolumeKind::Column,
                grid,
                aux: a as f64,
                values,
            };
            st.save_volume(&v, &format!("column_{}_{}_{}", focus[0], focus[1], focus[2]))
        }
        Command::IndirectAll(c) => {
            let st = Stage::open(&c)?;
            let mask = st
                .load_volume("mask", VolumeKind::Mask)?
                .into_mask()
                .map_err(|e| Error::format(st.out("mask.nlvx"), e))?;
            let gate = st.cfg.gate;
            let values = st.with_engine(|e| e.accumulate_in_focus_indirect(&mask, gate))?;
            let v = Volume {
                kind: VolumeKind::Indirect,
                grid: mask.grid,
                aux: 0.0,
                values,
            };
            st.save_volume(&v, "indirect")
        }
        Command::Ltm { common, masked } => {
            let st = Stage::open(&common)?;
            let mask = if masked {
                Some(
                    st.load_volume("mask", VolumeKind::Mask)?
                        .into_mask()
                        .map_err(|e| Error::format(st.out("mask.nlvx"), e))?,
                )
            } else {
                None
            };
            let grid = st.cfg.voxel_grid()?;
            let sources = st.cfg.source_list()?.unwrap_or_else(|| match &mask {
                Some(m) => m.occupied().collect(),
                None => (0..grid.len()).collect(),
            });
            let gate = st.cfg.gate;
            let t = st.with_engine(|e| {
                if sources.is_empty() {
                    return Ok(crate::ltm::TransportMatrix::new(grid, crate::ltm::MatrixKind::Masked));
                }
                e.assemble(&sources, gate, mask.as_ref())
            })?;
            let path = st.out("ltm.csv");
            io::export_matrix(&t, &path)?;
            println!(
                "{} columns, {} nonzero entries, energy {:e}",
                t.columns.len(),
                t.nonzeros().count(),
                t.total_energy()
            );
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Bands { common, intervals } => {
            let st = Stage::open(&common)?;
            let intervals = match intervals {
                Some(Intervals(v)) => v,
                None => st.cfg.intervals()?,
            };
            if intervals.is_empty() {
                return Err(Error::Config(
                    "bands: no intervals given in the configuration or with --intervals".into(),
                ));
            }
            let t = io::read_matrix(&st.out("ltm.nltm"))?;
            for (n, band) in band_decompose(&t, &intervals)?.iter().enumerate() {
                let path = st.out(&format!("band_{n}.csv"));
                io::export_matrix(band, &path)?;
                println!(
                    "band {n} [{}, {}): {} nonzero entries",
                    intervals[n].min,
                    intervals[n].max,
                    band.nonzeros().count()
                );
            }
            Ok(())
        }
    }
}

fn info(path: &Path) -> Result<()> {
    match io::sniff_magic(path)?.as_ref() {
        Some(m) if *m == io::nlir::MAGIC => {
            let h = io::read_nlir(path)?;
            let total: f64 = h.data.iter().sum();
            println!("format NLIR version 1");
            println!("K_p={}", h.topology.laser_count());
            println!("K_i={}", h.topology.spad_count());
            println!("bins={}", h.time_axis.bin_count);
            println!("bin_width={:e}", h.time_axis.bin_width);
            println!("origin={:e}", h.time_axis.origin);
            println!("wall_normal={:?}", h.topology.wall_normal.to_array());
            println!("total={total:e}");
        }
        Some(m) if *m == io::volume::MAGIC => {
            let v = io::read_volume(path)?;
            let max = v.values.iter().copied().fold(0.0, f64::max);
            println!("format NLVX version 1");
            println!("kind={:?}", v.kind);
            println!("counts={:?}", v.grid.counts);
            println!("max={max:e}");
        }
        Some(m) if *m == io::matrix::MAGIC => {
            let t = io::read_matrix(path)?;
            println!("format NLTM version 1");
            println!("kind={:?}", t.kind);
            println!("counts={:?}", t.grid.counts);
            println!("columns={}", t.columns.len());
            println!("nonzeros={}", t.nonzeros().count());
            println!("energy={:e}", t.total_energy());
        }
        found => {
            let found = found.copied().unwrap_or_default();
            return Err(Error::format(
                path,
                FormatError::Malformed(format!("unrecognized magic bytes {found:?}")),
            ));
        }
    }
    Ok(())
}
