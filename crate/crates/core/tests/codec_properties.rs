mod common;

use common::*;
use lfzr::dataio::{parse_raw, raw_bytes};
use lfzr::predictor::{NlmsPredictor, Predictor};
use lfzr::{
    compress, decode, decode_traced, decompress, encode, encode_traced, CodecConfig, PredictorId,
    TimeSeries,
};
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn ratio(series: &TimeSeries, config: &CodecConfig) -> f64 {
    let bytes = compress(series, config).unwrap();
    4.0 * series.values().len() as f64 / bytes.len() as f64
}

fn nlms(eps: f64) -> CodecConfig {
    CodecConfig::new(eps, PredictorId::Nlms)
}

#[test]
fn sinusoid_indices_concentrate_near_zero() {
    let x: Vec<f32> = (0..20_000)
        .map(|t| (0.01 * t as f64).sin() as f32)
        .collect();

    let reference = reference_indices(&x, 1e-3, 32, 0.5, 1.0);
    let near = reference[1000..].iter().filter(|i| i.abs() <= 1).count();
    assert!(near as f64 >= 0.95 * (x.len() - 1000) as f64);

    let c = encode(&TimeSeries::univariate(x.clone()), &nlms(1e-3)).unwrap();
    let got = &bin_indices(&c)[0];
    let near = got[1000..]
        .iter()
        .filter(|i| matches!(i, Some(-1..=1)))
        .count();
    assert!(near as f64 >= 0.95 * (x.len() - 1000) as f64, "{near}");
}

#[test]
fn random_walk_example_is_bounded() {
    let mut r = rng(7);
    let s = TimeSeries::univariate(random_walk(&mut r, 100_000, 0.01));
    let back = decompress(&compress(&s, &nlms(1e-3)).unwrap()).unwrap();
    assert!(max_abs_err(&s, &back) <= 1e-3);
}

#[test]
fn predictions_ignore_future_samples() {
    let mut r = rng(11);
    let x = sine_noise(&mut r, 2000, 0.01);
    let cut = 1200;
    let mut y = x.clone();
    for v in &mut y[cut..] {
        *v = r.gen_range(-1e4..1e4);
    }

    let trace = |v: Vec<f32>| {
        let mut digests = Vec::new();
        let (_, recon) = encode_traced(&TimeSeries::univariate(v), &nlms(1e-2), &mut |t, _, p| {
            digests.push((t, p.digest()))
        })
        .unwrap();
        (digests, recon.into_values())
    };
    let (dx, rx) = trace(x);
    let (dy, ry) = trace(y);
    // The probe fires after the update at t, so t < cut has seen only shared data.
    assert_eq!(dx[..cut], dy[..cut]);
    assert_eq!(
        rx[..cut].iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        ry[..cut].iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    assert_ne!(dx[cut..], dy[cut..]);
}

#[test]
fn multivariate_ordering_is_causal() {
    let mut r = rng(12);
    let cols: Vec<Vec<f32>> = (0..3).map(|_| random_walk(&mut r, 500, 0.1)).collect();
    let base = TimeSeries::from_columns(&cols).unwrap();
    let mut altered = cols.clone();
    // Variable 2 changes from t = 300 on; variables 0 and 1 at t = 300 must not notice.
    for v in &mut altered[2][300..] {
        *v += 5.0;
    }
    let altered = TimeSeries::from_columns(&altered).unwrap();
    let cfg = nlms(1e-2).with_window(9).with_multivariate(true);

    let trace = |s: &TimeSeries| {
        let mut d = Vec::new();
        encode_traced(s, &cfg, &mut |t, j, p| d.push((t, j, p.digest()))).unwrap();
        d
    };
    let (a, b) = (trace(&base), trace(&altered));
    let first_diff = a.iter().zip(&b).position(|(x, y)| x != y).unwrap();
    assert_eq!(a[first_diff].0, 300);
    assert_eq!(a[first_diff].1, 2);
}

#[test]
fn encoder_and_decoder_states_agree() {
    let mut r = rng(13);
    let s = TimeSeries::from_columns(&[heavy_jumps(&mut r, 3000), with_non_finite(&mut r, 3000)])
        .unwrap();
    for cfg in [
        nlms(1e-3),
        nlms(1e-2).with_multivariate(true),
        CodecConfig::new(1e-1, PredictorId::LastValue),
    ] {
        let mut enc = Vec::new();
        let (c, recon) =
            encode_traced(&s, &cfg, &mut |t, j, p| enc.push((t, j, p.digest()))).unwrap();
        let mut dec = Vec::new();
        let back = decode_traced(&c, &mut |t, j, p| dec.push((t, j, p.digest()))).unwrap();
        assert_eq!(enc, dec);
        assert!(recon.bit_eq(&back));
    }
}

#[test]
fn recompression_is_idempotent() {
    let mut r = rng(14);
    for eps in [1e-3, 1e-2, 1e-1] {
        let s = TimeSeries::univariate(sine_noise(&mut r, 5000, 0.05));
        let once = decompress(&compress(&s, &nlms(eps)).unwrap()).unwrap();
        let twice = decompress(&compress(&once, &nlms(eps)).unwrap()).unwrap();
        assert!(max_abs_err(&once, &twice) <= eps);
        assert!(max_abs_err(&s, &once) <= eps);
    }
}

#[test]
fn compression_is_deterministic() {
    let mut r = rng(15);
    let s = TimeSeries::univariate(heavy_jumps(&mut r, 10_000));
    for p in [
        PredictorId::Nlms,
        PredictorId::LastValue,
        PredictorId::CriticalAperture,
    ] {
        let cfg = CodecConfig::new(1e-2, p);
        assert_eq!(compress(&s, &cfg).unwrap(), compress(&s, &cfg).unwrap());
    }
}

#[test]
fn nlms_survives_huge_jumps() {
    let mut x = vec![0.0f32; 4000];
    for (t, v) in x.iter_mut().enumerate() {
        *v = if (t / 97) % 2 == 0 { 1e6 } else { -1e6 } + (t as f32 * 0.1).sin();
    }
    let s = TimeSeries::univariate(x);
    let mut p = NlmsPredictor::univariate(32, 0.5, 1.0);
    for &v in s.values() {
        assert!(p.predict(0).is_finite());
        p.update(0, v);
    }
    assert!(p.weights(0).iter().all(|w| w.is_finite()));
    let back = decompress(&compress(&s, &nlms(1e-2)).unwrap()).unwrap();
    assert!(max_abs_err(&s, &back) <= 1e-2);
}

// Does not hold: last-value turns a ramp into one constant bin, while NLMS
// keeps dithering over a few bins around zero. Run with `--ignored` to see it.
#[test]
#[ignore = "last-value codes a ramp as a constant symbol; NLMS cannot match it"]
fn nlms_beats_last_value_on_a_ramp() {
    let x: Vec<f32> = (0..20_000).map(|t| 0.37 * t as f32).collect();
    let s = TimeSeries::univariate(x);
    let nl = ratio(&s, &nlms(1e-3));
    let lv = ratio(&s, &CodecConfig::new(1e-3, PredictorId::LastValue));
    assert!(nl >= lv, "nlms {nl} last {lv}");
}

#[test]
fn nlms_tracks_a_ramp_within_a_bin() {
    let x: Vec<f32> = (0..20_000).map(|t| 0.37 * t as f32).collect();
    let c = encode(&TimeSeries::univariate(x), &nlms(1e-2)).unwrap();
    let idx = &bin_indices(&c)[0];
    let tail = &idx[10_000..];
    // A handful of samples land where neither neighbouring bin survives the
    // f32 rounding of the reconstruction; those go out as outliers.
    let outliers = tail.iter().filter(|i| i.is_none()).count();
    assert!(outliers * 100 < tail.len(), "{outliers}");
    assert!(tail.iter().flatten().all(|i| (-1..=1).contains(i)));
}

#[test]
fn multivariate_helps_correlated_pairs() {
    let eps = 1e-2;
    let mut r = rng(16);
    let noise = Normal::new(0.0, eps / 2.0).unwrap();
    let a = random_walk(&mut r, 50_000, 0.2);
    let b: Vec<f32> = a
        .iter()
        .map(|&v| (v as f64 + noise.sample(&mut r)) as f32)
        .collect();
    let s = TimeSeries::from_columns(&[a, b]).unwrap();
    let uni = ratio(&s, &nlms(eps));
    let multi = ratio(&s, &nlms(eps).with_multivariate(true));
    assert!(multi >= 1.05 * uni, "multi {multi} uni {uni}");
}

#[test]
fn nn_window_must_match_network() {
    let mut r = rng(17);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.lfnn");
    random_net(&mut r, 16).save(&path).unwrap();
    let mut cfg = CodecConfig::new(1e-2, PredictorId::Nn).with_window(32);
    cfg.nn_weight_path = Some(path);
    let s = TimeSeries::univariate(random_walk(&mut r, 100, 0.1));
    assert!(encode(&s, &cfg).is_err());
    cfg = cfg.with_window(16);
    let c = encode(&s, &cfg).unwrap();
    assert!(max_abs_err(&s, &decode(&c).unwrap()) <= 1e-2);
}

#[test]
fn raw_files_roundtrip_byte_for_byte() {
    let mut r = rng(18);
    let s =
        TimeSeries::from_columns(&[with_non_finite(&mut r, 777), random_walk(&mut r, 777, 1.0)])
            .unwrap();
    let bytes = raw_bytes(&s);
    let again = parse_raw(&bytes, 2).unwrap();
    assert!(again.bit_eq(&s));
    assert_eq!(raw_bytes(&again), bytes);
}
