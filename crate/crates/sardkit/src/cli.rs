//! Argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, AnalyzeArgs, CliResult, Common, EndpointArgs, FlowArgs, SurfaceArgs, VerifyArgs};
use sardkit_core::flow::{DEFAULT_EPS_CUT, DEFAULT_T_MAX};

use crate::verify::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(name = "sardkit", version, about = "Singular curves of rank-2 distributions on 4-manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Catalog name (engel_std, d224, d2334a, d2334b) or a JSON file with keys "f" and "g"
    #[arg(long, default_value = "d224")]
    pub model: String,
    /// Write the data file here
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
}

impl From<&CommonArgs> for Common {
    fn from(a: &CommonArgs) -> Self {
        Common { model: a.model.clone(), out: a.out.clone(), seed: a.seed, rtol: a.rtol, atol: a.atol }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Growth vector, Engel certificate and their agreement at points
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// x,y,z,w with decimal or p/q entries; repeatable
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
        /// lo:hi:n grid over the four (z, w) quadrants at x = y = 0
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_step: usize,
    },
    /// Characteristic field coefficients in all three variants
    Char {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Integrate a characteristic field
    Flow {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0,0,1,0", allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t: f64,
        /// oracle, printed, corrected or displayed
        #[arg(long, default_value = "oracle")]
        variant: String,
        /// rho, zw or certificate; repeatable or comma separated
        #[arg(long = "monitor", value_delimiter = ',')]
        monitors: Vec<String>,
    },
    /// Sample the set of points that flow into the origin
    Surface {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0.01:0.2:20")]
        grid: String,
        #[arg(long, default_value_t = DEFAULT_EPS_CUT)]
        eps_cut: f64,
        #[arg(long, default_value_t = DEFAULT_T_MAX)]
        t_max: f64,
        /// Only try forward time
        #[arg(long)]
        no_backward: bool,
    },
    /// Endpoint map linearization and the singularity detectors
    Endpoint {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0,0,0,0", allow_hyphen_values = true)]
        start: String,
        /// Control file: one u1,u2 pair per line
        #[arg(long)]
        control: Option<PathBuf>,
        /// Random piecewise-constant control with this many segments
        #[arg(long)]
        random_segments: Option<usize>,
        /// Discretized characteristic curve of this duration
        #[arg(long)]
        char_duration: Option<f64>,
        #[arg(long, default_value_t = 32)]
        segments: usize,
        /// Also compare against central finite differences
        #[arg(long)]
        fd: bool,
        /// Sample this many characteristic curves and summarize
        #[arg(long)]
        sard: Option<usize>,
        /// With --sard, write the endpoint cloud CSV here
        #[arg(long)]
        cloud: Option<PathBuf>,
    },
    /// Run the acceptance criteria
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        all: bool,
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
    },
}

pub fn dispatch(cmd: &Command, out: &mut dyn std::io::Write) -> CliResult {
    match cmd {
        Command::Analyze { common, points, grid, max_step } => commands::cmd_analyze(
            &common.into(),
            &AnalyzeArgs { points: points.clone(), grid: grid.clone(), max_step: *max_step },
            out,
        ),
        Command::Char { common } => commands::cmd_char(&common.into(), out),
        Command::Flow { common, start, t, variant, monitors } => commands::cmd_flow(
            &common.into(),
            &FlowArgs { start: start.clone(), t: *t, variant: variant.clone(), monitors: monitors.clone() },
            out,
        ),
        Command::Surface { common, grid, eps_cut, t_max, no_backward } => commands::cmd_surface(
            &common.into(),
            &SurfaceArgs { grid: grid.clone(), eps_cut: *eps_cut, t_max: *t_max, forward_only: *no_backward },
            out,
        ),
        Command::Endpoint { common, start, control, random_segments, char_duration, segments, fd, sard, cloud } => {
            commands::cmd_endpoint(
                &common.into(),
                &EndpointArgs {
                    start: start.clone(),
                    control: control.clone(),
                    random_segments: *random_segments,
                    char_duration: *char_duration,
                    segments: *segments,
                    fd: *fd,
                    sard: *sard,
                    cloud: cloud.clone(),
                },
                out,
            )
        }
        Command::Verify { common, all, criteria } => {
            if *all && !criteria.is_empty() {
                return Err(commands::CliError::Input("--all and --criterion are exclusive".into()));
            }
            commands::cmd_verify(&common.into(), &VerifyArgs { criteria: criteria.clone() }, out)
        }
    }
}
