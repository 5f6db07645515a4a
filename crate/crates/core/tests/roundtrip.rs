use bartlett_core::geometry::Space;
use bartlett_core::heat::synthetic_tempered_measure;
use bartlett_core::io::{json_string, write_text};
use bartlett_core::mclab::SamplerSpec;
use bartlett_core::processes::{PointConfiguration, RngStream};
use bartlett_core::spectral::{dpp_spectrum, poisson_spectrum, DppKernelSpec, SpectralMeasure};

#[test]
fn spectral_measure_json_round_trip() {
    let mut b = dpp_spectrum(Space::HyperbolicDisk, DppKernelSpec::Bergman).unwrap();
    b.complementary.push((0.3, 0.25));
    for m in [
        b,
        poisson_spectrum(Space::Euclidean { d: 3 }, 2.5).unwrap(),
        synthetic_tempered_measure(Space::Euclidean { d: 2 }, 2.5, 0.7).unwrap(),
        dpp_spectrum(Space::Euclidean { d: 2 }, DppKernelSpec::ginibre()).unwrap(),
    ] {
        let text = serde_json::to_string(&m).unwrap();
        let back: SpectralMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}

#[test]
fn spectral_csv_round_trip() {
    let m = dpp_spectrum(Space::HyperbolicDisk, DppKernelSpec::Bergman).unwrap();
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    let csv = m.to_csv(&grid).unwrap();
    let back = SpectralMeasure::from_csv(&csv, &m.metadata_json()).unwrap();
    for x in [0.0, 0.05, 1.0, 3.3, 10.0] {
        assert!((back.density(x).unwrap() - m.density(x).unwrap()).abs() < 1e-15, "x={x}");
    }
    // linear interpolation between grid points
    assert!((back.density(1.025).unwrap() - m.density(1.025).unwrap()).abs() < 1e-3);
    assert_eq!(back.to_csv(&grid).unwrap(), csv);
}

#[test]
fn malformed_csv_rejected() {
    let m = poisson_spectrum(Space::HyperbolicDisk, 1.0).unwrap();
    let meta = m.metadata_json();
    assert!(SpectralMeasure::from_csv("parameter,density\n0,1\n1\n", &meta).is_err());
    assert!(SpectralMeasure::from_csv("parameter,density\n0,x\n", &meta).is_err());
    assert!(SpectralMeasure::from_csv("parameter,density\n0,1\n", &serde_json::json!({})).is_err());
}

#[test]
fn configuration_json_round_trip() {
    let cfg = SamplerSpec::GafZeros { truncation: None }.sample(2.0, RngStream::new(4, 1)).unwrap();
    let back: PointConfiguration = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(cfg.to_csv().lines().count(), cfg.len() + 1);
}

#[test]
fn sampler_spec_round_trip() {
    for s in [
        SamplerSpec::Poisson { space: Space::Euclidean { d: 1 }, intensity: 0.5 },
        SamplerSpec::Ginibre { n_matrix: 1024 },
        SamplerSpec::GafZeros { truncation: Some(40) },
        SamplerSpec::Bergman { mode_cap: None },
    ] {
        let v = serde_json::to_value(s).unwrap();
        assert_eq!(serde_json::from_value::<SamplerSpec>(v).unwrap(), s);
    }
}

#[test]
fn written_json_ends_with_newline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nested/a.json");
    write_text(&p, &json_string(&serde_json::json!({"a": 1.5})).unwrap()).unwrap();
    let text = std::fs::read_to_string(p).unwrap();
    assert!(text.ends_with("}\n"));
}
