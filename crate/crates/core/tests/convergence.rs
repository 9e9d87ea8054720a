use wsquad::convergence::{periodic_holder_study, planar_holder_study, planar_smooth_study, RateStudy, StudyOptions};
use wsquad::planar::PlanarOptions;

const NS: [usize; 4] = [8, 16, 32, 64];

fn check_holder(study: &RateStudy, alpha: f64) {
    let slope = study.slope.expect("four usable points");
    assert!((slope - alpha).abs() <= 0.2, "slope {slope} for α = {alpha}");
    for row in &study.rows {
        assert!(row.abs_error < 10.0 * row.predicted, "{row:?}");
    }
}

#[test]
fn periodic_holder_rates() {
    let opts = StudyOptions::default();
    for lambda in [0.3, 0.5] {
        for alpha in [0.4, 0.6] {
            check_holder(&periodic_holder_study(lambda, alpha, &NS, &opts).unwrap(), alpha);
        }
    }
}

#[test]
fn planar_holder_rates() {
    let opts = StudyOptions::default();
    for lambda in [0.3, 0.5] {
        for alpha in [0.4, 0.6] {
            let study = planar_holder_study(lambda, alpha, &NS, (0.0, 0.0), &PlanarOptions::default(), &opts).unwrap();
            check_holder(&study, alpha);
        }
    }
}

#[test]
fn planar_holder_rate_off_grid() {
    let study =
        planar_holder_study(0.3, 0.5, &NS, (0.3, -0.55), &PlanarOptions::default(), &StudyOptions::default()).unwrap();
    check_holder(&study, 0.5);
}

#[test]
fn planar_smooth_rate() {
    let study =
        planar_smooth_study(0.3, 2, &[8, 16, 32], (0.0, 0.0), &PlanarOptions::default(), &StudyOptions::default())
            .unwrap();
    assert!(study.slope.unwrap() >= 1.5, "{study:?}");
    for row in &study.rows {
        assert!(row.abs_error <= row.predicted, "{row:?}");
    }
}

#[test]
fn study_rejects_bad_parameters() {
    let opts = StudyOptions::default();
    assert!(periodic_holder_study(0.3, 1.5, &NS, &opts).is_err());
    assert!(periodic_holder_study(1.2, 0.5, &NS, &opts).is_err());
    assert!(planar_smooth_study(0.3, 2, &[9], (0.0, 0.0), &PlanarOptions::default(), &opts).is_err());
}
