//! Single `helmetkit` binary exposing the toolkit as subcommands. Every
//! subcommand is a thin adapter over one library call: reports go to
//! standard output, files are written only through explicit `--out`
//! style flags, and all randomness takes a mandatory `--seed`.

mod sidecar;

use anyhow::{Context, Result};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use helmetkit::augment::{
    augment_blur, augment_flip, augment_rotate, augment_rotate_arbitrary, mosaic, split_dataset,
    LabeledSample, MosaicConfig, DEFAULT_MIN_VISIBILITY,
};
use helmetkit::bbox::FrameDims;
use helmetkit::detection::Detection;
use helmetkit::eval::{evaluate, evaluate_per_frame, DEFAULT_MATCH_IOU};
use helmetkit::fusion::{
    fuse, nms_per_frame, FusionConfig, FusionMode, ModelOutput, DEFAULT_CLUSTER_IOU,
    DEFAULT_NMS_IOU, DEFAULT_SKIP_THRESHOLD,
};
use helmetkit::imaging::ppm::{read_ppm_file, write_ppm_file};
use helmetkit::imaging::ImageBuffer;
use helmetkit::submission::{
    emit_submission, parse_ground_truth, parse_submission, validate_submission, SubmissionFile,
};
use helmetkit::video::{
    median_background, sample_frame_indices, FrameSequence, DEFAULT_SAMPLE_COUNT,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "helmetkit",
    version,
    about = "Detection pipeline toolkit: augmentation, background estimation, NMS, fusion, evaluation, and submission handling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mean,
    Weighted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Flip,
    Rotate,
    RotateFree,
    Blur,
}

#[derive(Subcommand)]
enum Command {
    /// Score a detection file against ground truth (VOC 2012 mAP)
    Evaluate {
        /// Ground-truth file (7 fields per line, no confidence)
        #[arg(long)]
        gt: PathBuf,
        /// Detection file in submission format (8 fields per line)
        #[arg(long)]
        pred: PathBuf,
        /// IoU required for a detection to match a ground-truth box
        #[arg(long, default_value_t = DEFAULT_MATCH_IOU)]
        iou: f64,
        /// Print machine-readable key=value lines instead of the report
        #[arg(long)]
        kv: bool,
        /// Average AP over ground-truth frames instead of classes
        #[arg(long)]
        per_frame: bool,
    },
    /// Merge detection files from several models into one
    Fuse {
        /// Detection file for one model; repeat once per model
        #[arg(long = "pred", required = true)]
        preds: Vec<PathBuf>,
        /// How cluster boxes are combined
        #[arg(long, value_enum, default_value_t = Mode::Weighted)]
        mode: Mode,
        /// IoU at which boxes join an existing cluster
        #[arg(long, default_value_t = DEFAULT_CLUSTER_IOU)]
        iou: f64,
        /// Drop fused detections below this confidence
        #[arg(long, default_value_t = DEFAULT_SKIP_THRESHOLD)]
        skip_threshold: f64,
        /// Write the fused file here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Suppress overlapping same-class detections frame by frame
    Nms {
        /// Detection file in submission format
        #[arg(long)]
        pred: PathBuf,
        /// IoU above which the lower-confidence box is dropped
        #[arg(long, default_value_t = DEFAULT_NMS_IOU)]
        iou: f64,
        /// Write the surviving detections here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transform one image and remap its label sidecar
    Augment {
        /// Transformation to apply
        #[arg(long, value_enum)]
        op: Op,
        /// Input image (binary PPM)
        #[arg(long)]
        image: PathBuf,
        /// Output image path
        #[arg(long)]
        out: PathBuf,
        /// Label sidecar for the input image (class cx cy w h, normalized)
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Write remapped labels here instead of standard output
        #[arg(long)]
        labels_out: Option<PathBuf>,
        /// Counterclockwise quarter turns for --op rotate
        #[arg(long, default_value_t = 1)]
        turns: u32,
        /// Counterclockwise angle in degrees for --op rotate-free
        #[arg(
            long,
            required_if_eq("op", "rotate-free"),
            allow_negative_numbers = true
        )]
        angle: Option<f64>,
        /// Gaussian standard deviation for --op blur
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Fill color for pixels rotated in from outside, as R,G,B
        #[arg(long, default_value = "0,0,0", value_parser = parse_fill)]
        fill: [u8; 3],
        /// Drop boxes whose visible fraction falls below this after rotate-free
        #[arg(long, default_value_t = DEFAULT_MIN_VISIBILITY)]
        min_visibility: f64,
    },
    /// Compose four labeled images into one mosaic crop
    Mosaic {
        /// Input image; pass exactly four times
        #[arg(long = "image", required = true)]
        images: Vec<PathBuf>,
        /// Label sidecar per image; pass zero or four times, in image order
        #[arg(long = "labels")]
        labels: Vec<PathBuf>,
        /// Output crop width in pixels
        #[arg(long)]
        width: u32,
        /// Output crop height in pixels
        #[arg(long)]
        height: u32,
        /// Seed for the crop position
        #[arg(long)]
        seed: u64,
        /// Drop boxes whose visible fraction falls below this
        #[arg(long, default_value_t = DEFAULT_MIN_VISIBILITY)]
        min_visibility: f64,
        /// Output image path
        #[arg(long)]
        out: PathBuf,
        /// Write remapped labels here instead of standard output
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// Estimate the static background of a frame directory
    Background {
        /// Directory of frame_000001.ppm style frames
        #[arg(long)]
        frames: PathBuf,
        /// Frames to sample for the median; the whole sequence if it is shorter
        #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
        sample_count: u32,
        /// Seed for frame sampling
        #[arg(long)]
        seed: u64,
        /// Output image path
        #[arg(long)]
        out: PathBuf,
    },
    /// Shuffle a manifest and split it into train and validation lists
    Split {
        /// Text file with one sample id per line
        #[arg(long)]
        manifest: PathBuf,
        /// Fraction of samples for validation (0.2 gives a 4:1 ratio)
        #[arg(long, default_value_t = 0.2)]
        val_fraction: f64,
        /// Seed for the shuffle
        #[arg(long)]
        seed: u64,
        /// Write the training list here instead of standard output
        #[arg(long)]
        train_out: Option<PathBuf>,
        /// Write the validation list here instead of standard output
        #[arg(long)]
        val_out: Option<PathBuf>,
    },
    /// Check a submission file against the challenge rules
    Validate {
        /// Detection file in submission format
        #[arg(long)]
        pred: PathBuf,
        /// Frame width every box must fit in
        #[arg(long, default_value_t = 1920)]
        width: u32,
        /// Frame height every box must fit in
        #[arg(long, default_value_t = 1080)]
        height: u32,
        /// Highest legal frame number (challenge videos run 200 frames)
        #[arg(long, default_value_t = 200)]
        max_frame: u32,
    },
}

fn parse_fill(raw: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected R,G,B, found {raw:?}"));
    }
    let mut rgb = [0u8; 3];
    for (slot, part) in rgb.iter_mut().zip(parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("channel {part:?} is not in 0..=255"))?;
    }
    Ok(rgb)
}

fn usage_error(message: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::InvalidValue, message)
        .exit()
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let file = parse_submission(&read_text(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(file.detections())
}

fn read_image(path: &Path) -> Result<ImageBuffer> {
    read_ppm_file(path).with_context(|| format!("reading {}", path.display()))
}

fn write_image(img: &ImageBuffer, path: &Path) -> Result<()> {
    write_ppm_file(img, path).with_context(|| format!("writing {}", path.display()))
}

/// Loads an image and its optional sidecar into one labeled sample.
fn read_sample(image: &Path, labels: Option<&Path>) -> Result<LabeledSample> {
    let img = read_image(image)?;
    let dims = FrameDims::new(img.width(), img.height())
        .with_context(|| format!("{}", image.display()))?;
    let boxes = match labels {
        Some(path) => sidecar::parse_labels(&read_text(path)?, dims)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => Vec::new(),
    };
    LabeledSample::new(img, boxes).with_context(|| format!("labels do not fit {}", image.display()))
}

/// Writes the sample's labels to `labels_out`, or prints them when the
/// input had labels and no output path was given.
fn deliver_labels(
    sample: &LabeledSample,
    had_labels: bool,
    labels_out: Option<&Path>,
) -> Result<()> {
    let dims = sample.dims();
    let text = sidecar::emit_labels(sample.boxes(), dims);
    match labels_out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None if had_labels => print!("{text}"),
        None => {}
    }
    Ok(())
}

fn deliver_detections(dets: Vec<Detection>, out: Option<&Path>) -> Result<()> {
    let text = emit_submission(&SubmissionFile::from_detections(dets));
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_list(items: &[String], path: &Path) -> Result<()> {
    let mut text = items.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Evaluate {
            gt,
            pred,
            iou,
            kv,
            per_frame,
        } => {
            let gts = parse_ground_truth(&read_text(&gt)?)
                .with_context(|| format!("parsing {}", gt.display()))?;
            let dets = read_detections(&pred)?;
            if per_frame {
                let score = evaluate_per_frame(&dets, &gts, iou)?;
                if kv {
                    println!("per_frame_map={score:.6}");
                } else {
                    println!("per-frame mAP {score:.6}");
                }
            } else {
                let report = evaluate(&dets, &gts, iou)?;
                print!("{}", if kv { report.to_kv() } else { report.to_text() });
            }
        }
        Command::Fuse {
            preds,
            mode,
            iou,
            skip_threshold,
            out,
        } => {
            let mut models = Vec::with_capacity(preds.len());
            for path in &preds {
                models.push(ModelOutput::new(
                    path.display().to_string(),
                    read_detections(path)?,
                ));
            }
            let mode = match mode {
                Mode::Mean => FusionMode::Mean,
                Mode::Weighted => FusionMode::Weighted,
            };
            let cfg = FusionConfig::new(iou, mode, skip_threshold)?;
            deliver_detections(fuse(&models, &cfg)?, out.as_deref())?;
        }
        Command::Nms { pred, iou, out } => {
            let kept = nms_per_frame(&read_detections(&pred)?, iou)?;
            deliver_detections(kept, out.as_deref())?;
        }
        Command::Augment {
            op,
            image,
            out,
            labels,
            labels_out,
            turns,
            angle,
            sigma,
            fill,
            min_visibility,
        } => {
            let had_labels = labels.is_some();
            let sample = read_sample(&image, labels.as_deref())?;
            let result = match op {
                Op::Flip => augment_flip(&sample),
                Op::Rotate => augment_rotate(&sample, turns)?,
                Op::RotateFree => {
                    let angle = angle.expect("clap requires --angle for rotate-free");
                    augment_rotate_arbitrary(&sample, angle, fill, min_visibility)?
                }
                Op::Blur => augment_blur(&sample, sigma)?,
            };
            write_image(result.image(), &out)?;
            deliver_labels(&result, had_labels, labels_out.as_deref())?;
        }
        Command::Mosaic {
            images,
            labels,
            width,
            height,
            seed,
            min_visibility,
            out,
            labels_out,
        } => {
            if images.len() != 4 {
                usage_error(&format!(
                    "--image must appear exactly 4 times, found {}",
                    images.len()
                ));
            }
            if !labels.is_empty() && labels.len() != 4 {
                usage_error(&format!(
                    "--labels must appear 0 or 4 times, found {}",
                    labels.len()
                ));
            }
            let had_labels = !labels.is_empty();
            let mut samples = Vec::with_capacity(4);
            for (i, image) in images.iter().enumerate() {
                samples.push(read_sample(image, labels.get(i).map(PathBuf::as_path))?);
            }
            let dims = FrameDims::new(width, height).context("--width/--height")?;
            let cfg = MosaicConfig::new(dims, min_visibility, seed)?;
            let result = mosaic(&samples, &cfg)?;
            write_image(result.image(), &out)?;
            deliver_labels(&result, had_labels, labels_out.as_deref())?;
        }
        Command::Background {
            frames,
            sample_count,
            seed,
            out,
        } => {
            let seq = FrameSequence::from_dir(&frames)
                .with_context(|| format!("scanning {}", frames.display()))?;
            let total = seq.len();
            let indices: Vec<u32> = if sample_count >= total {
                (1..=total).collect()
            } else {
                sample_frame_indices(total, sample_count, seed)?
            };
            let stack = seq.load_frames(&indices)?;
            let background = median_background(&stack)?;
            write_image(&background, &out)?;
        }
        Command::Split {
            manifest,
            val_fraction,
            seed,
            train_out,
            val_out,
        } => {
            let entries: Vec<String> = read_text(&manifest)?
                .lines()
                .map(|line| line.trim_end_matches('\r').to_string())
                .filter(|line| !line.is_empty())
                .collect();
            let (train, val) = split_dataset(&entries, val_fraction, seed)?;
            match train_out {
                Some(path) => write_list(&train, &path)?,
                None => train.iter().for_each(|item| println!("train {item}")),
            }
            match val_out {
                Some(path) => write_list(&val, &path)?,
                None => val.iter().for_each(|item| println!("val {item}")),
            }
        }
        Command::Validate {
            pred,
            width,
            height,
            max_frame,
        } => {
            let file = parse_submission(&read_text(&pred)?)
                .with_context(|| format!("parsing {}", pred.display()))?;
            let dims = FrameDims::new(width, height).context("--width/--height")?;
            let report = validate_submission(&file, dims, max_frame);
            print!("{}", report.to_text());
            if !report.is_valid() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
