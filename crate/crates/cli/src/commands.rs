//! One function per subcommand; each writes its outputs and returns the
//! lines printed on stdout.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lifting_core::image::Image;
use lifting_core::lifting::CostVolume;
use lifting_core::problems::brachistochrone::{self, BrachistochroneSpec, Cycloid};
use lifting_core::problems::extract::{extract_map, extract_scalar, MapSolution, ScalarSolution};
use lifting_core::problems::registration::{self, BoundaryMatch, RegistrationSpec};
use lifting_core::problems::scalar::{self, to_row_major, ScalarSpec};
use lifting_core::problems::{Problem, Solution};
use lifting_core::selftest;
use lifting_core::solver::{SolverConfig, SolverReport};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::io::{read_cost_volume, read_image, write_csv, write_image, write_json};
use crate::{
    BoundaryArg, BrachistochroneArgs, CommonArgs, DenoiseArgs, Pair, PreconditioningArg, Range, RegisterArgs,
    SampleModeSpec, SamplesArg, StereoArgs,
};

const COMMON_KEYS: &[&str] = &[
    "out",
    "max-iters",
    "tolerance",
    "primal-weight",
    "preconditioning",
    "samples",
];

/// Resolved shared options.
struct Common {
    config: Config,
    out: PathBuf,
    solver: SolverConfig,
    samples: Option<SampleModeSpec>,
    wall_time: bool,
}

impl Common {
    fn resolve(args: &CommonArgs, own_keys: &[&str]) -> CliResult<Self> {
        let config = match &args.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let keys: Vec<&str> = COMMON_KEYS.iter().chain(own_keys).copied().collect();
        config.check_keys(&keys)?;
        let out: PathBuf = config
            .pick(args.out.clone(), "out")?
            .ok_or_else(|| CliError::Usage("an output directory is required (--out)".into()))?;
        let mut solver = SolverConfig::default();
        if let Some(v) = config.pick(args.max_iters, "max-iters")? {
            solver.max_iters = v;
        }
        if let Some(v) = config.pick(args.tolerance, "tolerance")? {
            solver.tolerance = v;
        }
        if let Some(v) = config.pick(args.primal_weight, "primal-weight")? {
            solver.primal_weight = v;
        }
        if let Some(PreconditioningArg(p)) = config.pick(args.preconditioning, "preconditioning")? {
            solver.preconditioning = p;
        }
        solver.validate()?;
        let samples = config.pick(args.samples.clone(), "samples")?.map(|SamplesArg(s)| s);
        std::fs::create_dir_all(&out).map_err(|source| CliError::Write {
            path: out.clone(),
            source,
        })?;
        Ok(Self {
            config,
            out,
            solver,
            samples,
            wall_time: args.wall_time,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required (flag or config key)")))
}

fn positive(value: f64, name: &str) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {value}")))
    }
}

fn solver_json(report: &SolverReport) -> Value {
    json!({
        "iterations": report.iterations,
        "converged": report.converged,
        "primal_residual": report.primal_residual,
        "dual_residual": report.dual_residual,
        "energy": report.energy,
        "boundary_violation": report.boundary_violation,
        "pushforward_violation": report.pushforward_violation,
        "stationarity": report.stationarity,
    })
}

fn solve(problem: &Problem, common: &Common) -> CliResult<(Solution, Option<f64>)> {
    let start = Instant::now();
    let solution = problem.solve(&common.solver)?;
    let elapsed = common.wall_time.then(|| start.elapsed().as_secs_f64());
    Ok((solution, elapsed))
}

fn finish_report(mut report: Value, solution: &Solution, elapsed: Option<f64>, common: &Common) -> CliResult<()> {
    report["solver"] = solver_json(&solution.report);
    if let Some(t) = elapsed {
        report["wall_time_s"] = json!(t);
    }
    write_json(&common.path("report.json"), &report)?;
    let history = solution.report.history.iter().map(|h| {
        vec![
            h.iteration.to_string(),
            h.primal_residual.to_string(),
            h.dual_residual.to_string(),
            h.energy.to_string(),
        ]
    });
    write_csv(
        &common.path("history.csv"),
        &["iteration", "primal_residual", "dual_residual", "energy"],
        history,
    )
}

fn summary(name: &str, out: &Path, report: &SolverReport) -> String {
    format!(
        "{name}: {} iterations, converged {}, energy {:.6}, outputs in {}",
        report.iterations,
        report.converged,
        report.energy,
        out.display()
    )
}

pub fn brachistochrone(args: &BrachistochroneArgs) -> CliResult<Vec<String>> {
    let common = Common::resolve(&args.common, &["grid", "size", "g", "y-min"])?;
    let c = &common.config;
    let Pair(vx, vy) = c.pick(args.grid, "grid")?.unwrap_or(Pair(25, 14));
    if vx < 2 || vy < 2 {
        return Err(CliError::Usage(format!("grid needs at least 2x2 vertices, got {vx}x{vy}")));
    }
    let Pair(sx, sy) = c.pick(args.size, "size")?.unwrap_or(Pair(1.0, 1.0));
    let mut spec = BrachistochroneSpec {
        cells: [vx - 1, vy - 1],
        size: [positive(sx, "width")?, positive(sy, "height")?],
        gravity: positive(c.pick(args.g, "g")?.unwrap_or(9.81), "g")?,
        y_min: c.pick(args.y_min, "y-min")?,
        start: [0, 0],
        end: [(vx - 1) as i64, (vy - 1) as i64],
        ..BrachistochroneSpec::default()
    };
    if let Some(s) = common.samples {
        spec.sample_mode = s.resolve(1);
    }
    if let Some(y) = spec.y_min {
        positive(y, "y-min")?;
    }
    let problem = brachistochrone::build(&spec)?;
    let (solution, elapsed) = solve(&problem, &common)?;
    let extracted = extract_scalar(&problem.complex, 1, &solution.chain)?;
    let (a, b) = spec.endpoints();
    let cycloid = Cycloid::through(a, b, spec.gravity)?;
    let h = spec.spacing();
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for (col, (&value, &mass)) in extracted.values.iter().zip(&extracted.mass).enumerate() {
        let (x0, x1) = (h[0] * col as f64, h[0] * (col + 1) as f64);
        let reference = cycloid.mean_y(x0, x1);
        let deviation = (value - reference) / h[1];
        if col > 0 && col + 1 < spec.cells[0] && deviation.is_finite() {
            worst = worst.max(deviation.abs());
        }
        rows.push(vec![
            col.to_string(),
            (0.5 * (x0 + x1)).to_string(),
            value.to_string(),
            reference.to_string(),
            deviation.to_string(),
            mass.to_string(),
        ]);
    }
    write_csv(
        &common.path("curve.csv"),
        &["column", "x", "y", "cycloid_mean_y", "deviation_cells", "mass"],
        rows,
    )?;
    let report = json!({
        "kind": "brachistochrone",
        "cells": spec.cells,
        "size": spec.size,
        "gravity": spec.gravity,
        "y_min": spec.y_min(),
        "cycloid": {
            "radius": cycloid.radius,
            "x0": cycloid.x0,
            "theta_start": cycloid.theta_a,
            "theta_end": cycloid.theta_b,
            "travel_time": cycloid.travel_time(spec.gravity),
        },
        "max_interior_deviation_cells": worst,
        "empty_columns": extracted.empty,
    });
    finish_report(report, &solution, elapsed, &common)?;
    Ok(vec![
        summary("brachistochrone", &common.out, &solution.report),
        format!("max interior deviation from the cycloid: {worst:.4} cell heights"),
    ])
}

fn scalar_outputs(
    common: &Common,
    spec: &ScalarSpec,
    problem: &Problem,
    solution: &Solution,
) -> CliResult<(ScalarSolution, Vec<f64>)> {
    let extracted = extract_scalar(&problem.complex, 2, &solution.chain)?;
    let (w, h) = (spec.width, spec.height);
    let values = to_row_major(&extracted.values, w, h);
    let mass = to_row_major(&extracted.mass, w, h);
    let rows = (0..w * h).map(|k| {
        vec![
            (k % w).to_string(),
            (k / w).to_string(),
            values[k].to_string(),
            mass[k].to_string(),
        ]
    });
    write_csv(&common.path("values.csv"), &["x", "y", "value", "mass"], rows)?;
    Ok((extracted, values))
}

fn distinct(values: &[f64]) -> usize {
    let mut keys: Vec<i64> = values
        .iter()
        .filter(|v| v.is_finite())
        .map(|v| (v * 1e6).round() as i64)
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

pub fn denoise(args: &DenoiseArgs) -> CliResult<Vec<String>> {
    let common = Common::resolve(&args.common, &["input", "labels", "range", "beta"])?;
    let c = &common.config;
    let input: PathBuf = required(c.pick(args.input.clone(), "input")?, "input")?;
    let labels = c.pick(args.labels, "labels")?.unwrap_or(8);
    let Range(lo, hi) = c.pick(args.range, "range")?.unwrap_or(Range(0.0, 1.0));
    let beta = c.pick(args.beta, "beta")?.unwrap_or(100.0);
    let image = read_image(&input)?.to_gray();
    let mut spec = ScalarSpec::denoise(image, labels, (lo, hi), beta);
    if let Some(s) = common.samples {
        spec.sample_mode = s.resolve(2);
    }
    let problem = scalar::build(&spec)?;
    let (solution, elapsed) = solve(&problem, &common)?;
    let (extracted, values) = scalar_outputs(&common, &spec, &problem, &solution)?;
    let span = hi - lo;
    let pixels = values.iter().map(|v| if v.is_finite() { (v - lo) / span } else { 0.0 }).collect();
    write_image(
        &common.path("denoised.pgm"),
        &Image::new(spec.width, spec.height, 1, pixels)?,
    )?;
    let report = json!({
        "kind": "denoise",
        "input": input,
        "width": spec.width,
        "height": spec.height,
        "labels": labels,
        "range": [lo, hi],
        "beta": beta,
        "distinct_values": distinct(&values),
        "empty_fibers": extracted.empty.len(),
    });
    finish_report(report, &solution, elapsed, &common)?;
    Ok(vec![summary("denoise", &common.out, &solution.report)])
}

pub fn stereo(args: &StereoArgs) -> CliResult<Vec<String>> {
    let common = Common::resolve(&args.common, &["volume", "left", "right", "labels", "weight"])?;
    let c = &common.config;
    let volume_path: Option<PathBuf> = c.pick(args.volume.clone(), "volume")?;
    let volume = match volume_path {
        Some(path) => read_cost_volume(&path)?,
        None => {
            let left: PathBuf = required(c.pick(args.left.clone(), "left")?, "left")?;
            let right: PathBuf = required(c.pick(args.right.clone(), "right")?, "right")?;
            let labels = required(c.pick(args.labels, "labels")?, "labels")?;
            CostVolume::from_rectified_pair(&read_image(&left)?, &read_image(&right)?, labels)?
        }
    };
    if volume.nlabels < 2 {
        return Err(CliError::Usage("stereo needs at least two disparity levels".into()));
    }
    let weight = c.pick(args.weight, "weight")?.unwrap_or(1.0);
    let nlabels = volume.nlabels;
    let mut spec = ScalarSpec::stereo(volume, weight);
    if let Some(s) = common.samples {
        spec.sample_mode = s.resolve(2);
    }
    let problem = scalar::build(&spec)?;
    let (solution, elapsed) = solve(&problem, &common)?;
    let (extracted, values) = scalar_outputs(&common, &spec, &problem, &solution)?;
    let top = (nlabels - 1) as f64;
    let pixels = values.iter().map(|v| if v.is_finite() { v / top } else { 0.0 }).collect();
    write_image(
        &common.path("disparity.pgm"),
        &Image::new(spec.width, spec.height, 1, pixels)?,
    )?;
    let report = json!({
        "kind": "stereo",
        "width": spec.width,
        "height": spec.height,
        "labels": nlabels,
        "weight": weight,
        "distinct_values": distinct(&values),
        "empty_fibers": extracted.empty.len(),
    });
    finish_report(report, &solution, elapsed, &common)?;
    Ok(vec![summary("stereo", &common.out, &solution.report)])
}

/// Nearest-pixel lookup of `image` at physical points, black outside.
fn warp(image: &Image, points: &[[f64; 2]]) -> CliResult<Image> {
    let mut data = Vec::with_capacity(points.len() * image.channels);
    for p in points {
        let (i, j) = (p[0].floor(), p[1].floor());
        if p[0].is_finite() && i >= 0.0 && j >= 0.0 && (i as usize) < image.width && (j as usize) < image.height {
            data.extend_from_slice(image.pixel(i as usize, j as usize));
        } else {
            data.extend(std::iter::repeat_n(0.0, image.channels));
        }
    }
    Ok(Image::new(image.width, image.height, image.channels, data)?)
}

fn map_rows(map: &MapSolution, field: &[[f64; 2]], concentration: bool) -> Vec<Vec<String>> {
    (0..map.width * map.height)
        .map(|k| {
            let (i, j) = (k % map.width, k / map.width);
            let (cx, cy) = (i as f64 + 0.5, j as f64 + 0.5);
            let f = field[k];
            let mut row = vec![
                i.to_string(),
                j.to_string(),
                f[0].to_string(),
                f[1].to_string(),
                (f[0] - cx).to_string(),
                (f[1] - cy).to_string(),
            ];
            if concentration {
                row.push(map.concentration[k].to_string());
            }
            row
        })
        .collect()
}

pub fn register(args: &RegisterArgs) -> CliResult<Vec<String>> {
    let common = Common::resolve(&args.common, &["fixed", "moving", "epsilon", "boundary"])?;
    let c = &common.config;
    let fixed_path: PathBuf = required(c.pick(args.fixed.clone(), "fixed")?, "fixed")?;
    let moving_path: PathBuf = required(c.pick(args.moving.clone(), "moving")?, "moving")?;
    let epsilon = positive(required(c.pick(args.epsilon, "epsilon")?, "epsilon")?, "epsilon")?;
    let boundary = c.pick(args.boundary, "boundary")?.unwrap_or(BoundaryArg::Identity);
    let fixed = read_image(&fixed_path)?;
    let moving = read_image(&moving_path)?;
    let mut spec = RegistrationSpec::new(fixed.clone(), moving.clone(), epsilon);
    spec.boundary = match boundary {
        BoundaryArg::Identity => BoundaryMatch::Identity,
        BoundaryArg::Free => BoundaryMatch::Free,
    };
    if let Some(s) = common.samples {
        spec.sample_mode = s.resolve(2);
    }
    let problem = registration::build(&spec)?;
    let (solution, elapsed) = solve(&problem, &common)?;
    let map = extract_map(&problem.complex, &solution.chain)?;
    write_csv(
        &common.path("forward.csv"),
        &["x", "y", "fx", "fy", "dx", "dy", "concentration"],
        map_rows(&map, &map.forward, true),
    )?;
    write_csv(
        &common.path("backward.csv"),
        &["x", "y", "gx", "gy", "dx", "dy"],
        map_rows(&map, &map.backward, false),
    )?;
    write_image(&common.path("warped.ppm"), &to_color(warp(&moving, &map.forward)?))?;
    write_image(&common.path("inverse_warped.ppm"), &to_color(warp(&fixed, &map.backward)?))?;
    let conc = &map.concentration;
    let report = json!({
        "kind": "register",
        "fixed": fixed_path,
        "moving": moving_path,
        "width": map.width,
        "height": map.height,
        "epsilon": epsilon,
        "boundary": match boundary { BoundaryArg::Identity => "identity", BoundaryArg::Free => "free" },
        "concentration_min": conc.iter().cloned().fold(f64::INFINITY, f64::min),
        "concentration_mean": conc.iter().sum::<f64>() / conc.len() as f64,
        "empty_forward": map.empty_forward.len(),
        "empty_backward": map.empty_backward.len(),
    });
    finish_report(report, &solution, elapsed, &common)?;
    Ok(vec![summary("register", &common.out, &solution.report)])
}

/// Gray images are written as PPM previews too.
fn to_color(image: Image) -> Image {
    if image.channels == 3 {
        return image;
    }
    let data = image.data.iter().flat_map(|&v| [v, v, v]).collect();
    Image {
        channels: 3,
        data,
        ..image
    }
}

pub fn selftest() -> CliResult<Vec<String>> {
    let checks = selftest::run_all()?;
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        lines.push(format!("{status} {} (error {:.3e}, tolerance {:.1e})", c.name, c.error, c.tolerance));
        if !c.passed {
            failed.push(c.name);
        }
    }
    if failed.is_empty() {
        lines.push(format!("{} checks passed", checks.len()));
        Ok(lines)
    } else {
        for l in &lines {
            println!("{l}");
        }
        Err(CliError::SelftestFailed(format!("failed: {}", failed.join(", "))))
    }
}
