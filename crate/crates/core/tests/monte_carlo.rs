use std::f64::consts::FRAC_PI_4;

use barenco::config::{Preset, TrapSpec};
use barenco::error_budget::{mc_position_error, GateTemplate};
use barenco::protocols::Protocol;
use barenco::Error;

fn template() -> GateTemplate {
    GateTemplate { protocol: Protocol::I, beta0: 0.0, beta1: FRAC_PI_4, wait: 0.5 }
}

#[test]
fn quadrupling_samples_halves_the_standard_error() {
    let pre = Preset::appendix_a();
    let small = mc_position_error(&template(), &pre.vdw, &pre.trap, 4_000, 1).unwrap();
    let large = mc_position_error(&template(), &pre.vdw, &pre.trap, 16_000, 1).unwrap();
    let ratio = small.std_error_of_mean / large.std_error_of_mean;
    assert!((1.7..2.3).contains(&ratio), "SEM ratio {ratio}");
    let gap = (small.mean_error - large.mean_error).abs();
    assert!(gap < 4.0 * small.std_error_of_mean);
}

#[test]
fn error_grows_with_temperature() {
    let pre = Preset::appendix_a();
    let at = |t: f64| {
        let trap = TrapSpec { temperature_uk: t, ..pre.trap };
        mc_position_error(&template(), &pre.vdw, &trap, 4_000, 5).unwrap().mean_error
    };
    let (cold, warm, hot) = (at(10.0), at(50.0), at(200.0));
    assert!(cold < warm && warm < hot);
}

#[test]
fn protocol2_template_runs() {
    let pre = Preset::appendix_a();
    let t = GateTemplate { protocol: Protocol::II, beta0: 0.0, beta1: 0.3, wait: 0.8 };
    let r = mc_position_error(&t, &pre.vdw, &pre.trap, 2_000, 9).unwrap();
    assert!(r.mean_error > 0.0 && r.mean_error < 1.0);
    assert_eq!(r.samples + r.invalid_samples, 2_000);
}

#[test]
fn too_few_samples_is_rejected() {
    let pre = Preset::appendix_a();
    let r = mc_position_error(&template(), &pre.vdw, &pre.trap, 10, 1);
    assert!(matches!(r, Err(Error::Contract(_))));
}
