use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use tfatom::gabor::idgt;
use tfatom::signal::slepian_window;
use tfatom::tfr::synthesize;
use tfatom::{Complex64, GaborFrame, SparseTF, TFGridCoefficients, TfAtom};

fn tfatom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfatom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_samples(path: &Path) -> Vec<Complex64> {
    fs::read(path)
        .unwrap()
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect()
}

fn write_samples(path: &Path, samples: &[Complex64]) {
    let bytes: Vec<u8> = samples
        .iter()
        .flat_map(|s| s.re.to_le_bytes().into_iter().chain(s.im.to_le_bytes()))
        .collect();
    fs::write(path, bytes).unwrap();
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn synth(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut all = vec!["synth", "--output", path_str(&path)];
    all.extend_from_slice(args);
    let out = tfatom(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn analyze(input: &Path, output: &Path, args: &[&str]) -> Output {
    let mut all = vec!["analyze", "--input", path_str(input), "--output", path_str(output)];
    all.extend_from_slice(args);
    tfatom(&all)
}

const SMALL_FRAME: [&str; 10] = [
    "--window", "slepian", "--winlen", "16", "--bandwidth", "0.1", "--hop", "4", "--channels", "16",
];

fn atoms_of(v: &Value) -> Vec<TfAtom> {
    v["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| TfAtom {
            window: a["n"].as_u64().unwrap() as usize,
            omega: a["omega"].as_f64().unwrap(),
            coefficient: Complex64::new(a["re"].as_f64().unwrap(), a["im"].as_f64().unwrap()),
        })
        .collect()
}

#[test]
fn synth_sinusoid_quarter_rate() {
    let dir = TempDir::new().unwrap();
    let path = synth(&dir, "s.bin", &["--kind", "sin", "--freq", "0.25", "--length", "4"]);
    let s = read_samples(&path);
    let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
    assert_eq!(s.len(), 4);
    for (v, (re, im)) in s.iter().zip(expected) {
        assert!((v - Complex64::new(re, im)).norm() < 1e-15);
    }
}

#[test]
fn synth_mixture_container() {
    let dir = TempDir::new().unwrap();
    let path = synth(&dir, "mix.bin", &["--kind", "mix", "--length", "512"]);
    assert_eq!(fs::metadata(&path).unwrap().len(), 512 * 16);
    let side = json(&dir.path().join("mix.bin.json"));
    assert_eq!(side["length"], 512);
    assert_eq!(side["generator"]["components"].as_array().unwrap().len(), 3);
}

#[test]
fn synth_linear_chirp_phase() {
    let dir = TempDir::new().unwrap();
    let path = synth(
        &dir,
        "c.bin",
        &["--kind", "chirp-lin", "--length", "256", "--f0", "0.05", "--rate", "1e-3"],
    );
    let s = read_samples(&path);
    let l = 100.0;
    let phase = 2.0 * PI * (0.05 * l + 0.5 * 1e-3 * l * l);
    assert!((s[100] - Complex64::from_polar(1.0, phase)).norm() < 1e-9);
}

#[test]
fn synth_unwritable_path_exits_2() {
    let out = tfatom(&["synth", "--kind", "sin", "--length", "8", "--output", "/nonexistent/dir/x.bin"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn zero_signal_gives_empty_atoms_for_every_method() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("zero.bin");
    write_samples(&input, &vec![Complex64::new(0.0, 0.0); 64]);
    let mut keys = Vec::new();
    for method in ["dgt", "l1", "anm-window", "anm-joint"] {
        let output = dir.path().join(format!("{method}.json"));
        let mut args = vec!["--method", method];
        args.extend_from_slice(&SMALL_FRAME);
        let out = analyze(&input, &output, &args);
        assert_eq!(code(&out), 0, "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&output);
        assert!(v["atoms"].as_array().unwrap().is_empty(), "{method}");
        assert_eq!(v["metadata"]["objective"], 0.0);
        assert_eq!(v["metadata"]["method"], method);
        // field names and their order, from the raw text
        let text = fs::read_to_string(&output).unwrap();
        let names: Vec<String> = text
            .lines()
            .filter_map(|l| l.trim().split_once("\":").map(|(k, _)| k.trim_matches('"').to_string()))
            .collect();
        keys.push(names);
    }
    assert!(keys.iter().all(|k| *k == keys[0]));
}

#[test]
fn dgt_round_trip_reconstructs_input() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "mix.bin", &["--kind", "mix", "--length", "128"]);
    let output = dir.path().join("dgt.json");
    let mut args = vec!["--method", "dgt"];
    args.extend_from_slice(&SMALL_FRAME);
    assert_eq!(code(&analyze(&input, &output, &args)), 0);

    let frame = GaborFrame::new(slepian_window(16, 0.1).unwrap(), 4, 16, 128).unwrap();
    let tf = SparseTF::new(atoms_of(&json(&output)), 4, 16, 128).unwrap();
    let original = read_samples(&input);
    let back = synthesize(&tf, &frame).unwrap();
    let err: f64 = back
        .samples()
        .iter()
        .zip(&original)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm: f64 = original.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    assert!(err / norm <= 1e-10, "relative error {}", err / norm);

    // same reconstruction through the on-grid synthesis
    let mut grid = TFGridCoefficients::zeros(&frame);
    for a in tf.atoms() {
        let m = (a.omega * 16.0).round() as usize;
        let rot = Complex64::from_polar(1.0, 2.0 * PI * ((m * 4 * a.window) % 16) as f64 / 16.0);
        grid.values_mut()[m + 16 * a.window] = a.coefficient * rot;
    }
    let direct = idgt(&grid, &frame).unwrap();
    for (a, b) in direct.samples().iter().zip(back.samples()) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn joint_anm_finds_off_grid_frequency() {
    let dir = TempDir::new().unwrap();
    let omega = 10.5 / 64.0;
    let freq = omega.to_string();
    let input = synth(&dir, "s.bin", &["--kind", "sin", "--freq", &freq, "--length", "512"]);
    let output = dir.path().join("joint.json");
    let out = analyze(
        &input,
        &output,
        &[
            "--method", "anm-joint", "--window", "slepian", "--winlen", "32", "--bandwidth", "0.08",
            "--hop", "8", "--channels", "64", "--rho", "0.5", "--rank-tol", "1e-2",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&output);
    let atoms = atoms_of(&v);
    assert!(!atoms.is_empty());
    // strongest atom of every interior window
    for n in 0..=(512 - 32) / 8 {
        let best = atoms
            .iter()
            .filter(|a| a.window == n)
            .max_by(|a, b| a.energy().total_cmp(&b.energy()))
            .unwrap();
        assert!((best.omega - omega).abs() <= 2e-3, "window {n}: {}", best.omega);
    }
    assert_eq!(v["metadata"]["converged"], true);
}

#[test]
fn paper_parameter_smoke_run() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "mix.bin", &["--kind", "mix", "--length", "2048"]);
    let output = dir.path().join("dgt.json");
    let out = analyze(
        &input,
        &output,
        &[
            "--method", "dgt", "--window", "slepian", "--winlen", "128", "--bandwidth", "0.04", "--hop",
            "16", "--channels", "1024",
        ],
    );
    assert_eq!(code(&out), 0);
    let v = json(&output);
    assert_eq!(v["metadata"]["shifts"], 128);
    assert_eq!(v["metadata"]["window"]["length"], 128);
}

#[test]
fn iteration_cap_exits_3_and_still_writes() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "mix.bin", &["--kind", "mix", "--length", "64"]);
    let output = dir.path().join("capped.json");
    let mut args = vec!["--method", "anm-joint", "--max-iters", "5"];
    args.extend_from_slice(&SMALL_FRAME);
    let out = analyze(&input, &output, &args);
    assert_eq!(code(&out), 3);
    let v = json(&output);
    assert_eq!(v["metadata"]["converged"], false);
    assert_eq!(v["metadata"]["iterations"], 5);
}

#[test]
fn invalid_frames_exit_4() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "s.bin", &["--kind", "sin", "--length", "60"]);
    let output = dir.path().join("o.json");
    // hop does not divide the length
    let out = analyze(&input, &output, &["--method", "dgt", "--winlen", "8", "--hop", "7", "--channels", "8"]);
    assert_eq!(code(&out), 4);
    // dual window needs J <= M
    let out = analyze(
        &input,
        &output,
        &["--method", "l1", "--window", "hann", "--winlen", "12", "--hop", "3", "--channels", "4"],
    );
    assert_eq!(code(&out), 4);
    let out = analyze(&input, &output, &["--method", "dgt", "--window", "hann", "--winlen", "12", "--hop", "3", "--channels", "4"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.bin");
    fs::write(&bad, [0u8; 17]).unwrap();
    let output = dir.path().join("o.json");
    assert_eq!(code(&analyze(&bad, &output, &["--method", "dgt"])), 2);
    let missing = dir.path().join("missing.bin");
    assert_eq!(code(&analyze(&missing, &output, &["--method", "dgt"])), 2);
    let out = tfatom(&["analyze", "--method", "dgt"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wav_input_is_truncated_to_hop_multiple() {
    let dir = TempDir::new().unwrap();
    let wav = dir.path().join("tone.wav");
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: 8000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(&wav, spec).unwrap();
    for l in 0..100 {
        writer
            .write_sample((8000.0 * (2.0 * PI * 0.1 * l as f64).cos()) as i16)
            .unwrap();
    }
    writer.finalize().unwrap();
    let output = dir.path().join("wav.json");
    let mut args = vec!["--method", "dgt"];
    args.extend_from_slice(&SMALL_FRAME);
    let out = analyze(&wav, &output, &args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&output);
    assert_eq!(v["metadata"]["signal_length"], 100 / 4 * 4);
    assert_eq!(v["metadata"]["sample_rate"], 8000.0);

    let stereo = dir.path().join("stereo.wav");
    let mut writer = hound::WavWriter::create(&stereo, hound::WavSpec { channels: 2, ..spec }).unwrap();
    for _ in 0..64 {
        writer.write_sample(0i16).unwrap();
    }
    writer.finalize().unwrap();
    assert_eq!(code(&analyze(&stereo, &output, &args)), 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "s.bin", &["--kind", "sin", "--length", "64"]);
    let output = dir.path().join("o.json");
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "method = \"dgt\"\nwindow = \"slepian\"\nwinlen = 16\nbandwidth = 0.1\nhop = 8\nchannels = 16\ninput = \"{}\"\noutput = \"{}\"\n",
            path_str(&input),
            path_str(&output)
        ),
    )
    .unwrap();
    let out = tfatom(&["analyze", "--config", path_str(&config), "--hop", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&output);
    assert_eq!(v["metadata"]["method"], "dgt");
    assert_eq!(v["metadata"]["hop"], 4);
    assert_eq!(v["metadata"]["channels"], 16);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "mix.bin", &["--kind", "mix", "--length", "64"]);
    let mut results = Vec::new();
    for threads in ["1", "3"] {
        let output = dir.path().join(format!("t{threads}.json"));
        let mut args = vec!["--threads", threads, "--method", "anm-joint", "--max-iters", "50"];
        args.extend_from_slice(&SMALL_FRAME);
        analyze(&input, &output, &args);
        let mut v = json(&output);
        v["metadata"]["wall_time_s"] = Value::Null;
        results.push(v);
    }
    assert_eq!(results[0], results[1]);
}

fn write_solution(dir: &TempDir, name: &str, atoms: &[(usize, f64, f64, f64)]) -> PathBuf {
    let path = dir.path().join(name);
    let atoms: Vec<Value> = atoms
        .iter()
        .map(|&(n, omega, re, im)| serde_json::json!({"n": n, "omega": omega, "re": re, "im": im}))
        .collect();
    let v = serde_json::json!({
        "metadata": {
            "method": "l1", "window": {"kind": "rect", "length": 4, "bandwidth": null},
            "hop": 4, "channels": 8, "signal_length": 32, "shifts": 8, "sample_rate": null,
            "rho": 1.0, "max_iters": 10, "primal_tol": 1e-7, "dual_tol": 1e-7, "rank_tol": 1e-6,
            "iterations": 1, "converged": true, "primal_residual": 0.0, "dual_residual": 0.0,
            "objective": 0.0, "wall_time_s": 0.0, "warnings": []
        },
        "atoms": atoms,
    });
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    path
}

fn read_pgm(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = fs::read(path).unwrap();
    let header_end = bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .nth(2)
        .unwrap()
        .0;
    let header = String::from_utf8_lossy(&bytes[..header_end]).to_string();
    let fields: Vec<&str> = header.split_whitespace().collect();
    assert_eq!(fields[0], "P5");
    assert_eq!(fields[3], "255");
    let w = fields[1].parse().unwrap();
    let h = fields[2].parse().unwrap();
    (w, h, bytes[header_end + 1..].to_vec())
}

#[test]
fn render_empty_and_single_atom() {
    let dir = TempDir::new().unwrap();
    let empty = write_solution(&dir, "empty.json", &[]);
    let img = dir.path().join("empty.pgm");
    let out = tfatom(&["render", "-i", path_str(&empty), "-o", path_str(&img), "--bins", "16"]);
    assert_eq!(code(&out), 0);
    let (w, h, px) = read_pgm(&img);
    assert_eq!((w, h), (8, 16));
    assert!(px.iter().all(|&p| p == 0));

    let one = write_solution(&dir, "one.json", &[(3, 0.25, 1.0, 0.0)]);
    let img = dir.path().join("one.pgm");
    let csv = dir.path().join("one.csv");
    let out = tfatom(&[
        "render", "-i", path_str(&one), "-o", path_str(&img), "--bins", "8", "--floor", "-60", "--csv",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0);
    let (w, h, px) = read_pgm(&img);
    assert_eq!((w, h, px.len()), (8, 8, 64));
    let lit: Vec<usize> = (0..64).filter(|&i| px[i] == 255).collect();
    // bin 2 sits on row 8 - 1 - 2 from the top
    assert_eq!(lit, vec![5 * 8 + 3]);
    assert_eq!(px.iter().filter(|&&p| p != 0).count(), 1);
    let table = fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 9);
    assert!(table.lines().nth(3).unwrap().starts_with("2,-60,-60,-60,0,"));
}

#[test]
fn render_missing_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = tfatom(&[
        "render", "-i", path_str(&dir.path().join("none.json")), "-o", path_str(&dir.path().join("x.pgm")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn curve_rows_and_padding() {
    let dir = TempDir::new().unwrap();
    let a = write_solution(&dir, "a.json", &[(0, 0.1, 2.0, 0.0), (1, 0.2, 0.0, -1.0), (2, 0.3, 1.0, 1.0)]);
    let b = write_solution(&dir, "b.json", &[(0, 0.1, 3.0, 0.0)]);
    let csv = dir.path().join("c.csv");
    let out = tfatom(&["curve", "-i", path_str(&a), "-o", path_str(&csv)]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text, "index,l1\n0,4\n1,2\n2,1\n");

    let out = tfatom(&["curve", "-i", path_str(&a), path_str(&b), "-o", path_str(&csv)]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "index,l1,l1#2");
    assert_eq!(lines[3], "2,1,0");
    assert!(!text.contains('\r'));
}
