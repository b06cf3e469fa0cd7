use peca_core::analysis::EventKind;
use peca_core::experiment::{run_experiment, simulate, ExperimentSpec};
use peca_core::io::{import_diagram, Format};
use peca_core::{evolve, single_seed, Boundary, RuleTable};

fn spec(text: &str) -> ExperimentSpec {
    ExperimentSpec::parse(text).unwrap()
}

#[test]
fn rule90_photonic_run_draws_the_table_diagram() {
    let (d, r) = simulate(&spec(
        "mode = photonic\nrule = 90\nwidth = 513\nsteps = 256\nanalyses = fractal, extinction\n",
    ))
    .unwrap();
    let table = evolve(&single_seed(513, Boundary::FixedDead), &RuleTable::new(90), 256);
    assert_eq!(d.rows(), table.rows());
    let fractal = r.analyses.fractal.unwrap();
    assert_eq!(fractal.box_sizes.last(), Some(&128));
    assert!(fractal.dimension > 1.4 && fractal.dimension < 1.7, "{fractal:?}");
    assert_eq!(r.analyses.extinction_ratio, Some(f64::INFINITY));
}

#[test]
fn rule0_is_dead_after_one_step_in_every_mode() {
    for mode in ["table", "photonic", "emulator"] {
        let (d, _) = simulate(&spec(&format!("mode = {mode}\nrule = 0\nwidth = 40\nsteps = 6\ninitial = random:11\n"))).unwrap();
        assert!(!d.row(0).is_dead());
        assert!(d.rows()[1..].iter().all(|g| g.is_dead()), "{mode}");
    }
}

#[test]
fn rule30_damage_spreads_right_at_light_speed() {
    let (_, r) = simulate(&spec("rule = 30\nwidth = 1001\nsteps = 400\ninitial = random:7\nanalyses = damage\n")).unwrap();
    let damage = r.analyses.damage.unwrap();
    assert!((damage.lambda_right - 1.0).abs() < 0.05, "{}", damage.lambda_right);
    assert!(damage.lambda_left > 0.1 && damage.lambda_left < 0.4, "{}", damage.lambda_left);
}

#[test]
fn collision_fixture_through_the_runner() {
    let (_, r) = simulate(&spec(
        "rule = 54\ninitial = fixture:rule54-collision\nether = rule54-ether\nanalyses = gliders\n",
    ))
    .unwrap();
    let events = r.analyses.gliders.unwrap();
    assert_eq!(events.iter().filter(|e| e.kind == EventKind::Collision).count(), 1);
    assert!(r.analyses.ether.unwrap().coverage > 0.9);
}

#[test]
fn pure_ether_has_no_events() {
    let (d, r) = simulate(&spec("rule = 54\ninitial = fixture:rule54-ether\nanalyses = gliders\n")).unwrap();
    assert!(d.count_live() > 0);
    assert!(r.analyses.gliders.unwrap().is_empty());
}

#[test]
fn bundle_formats_agree_on_states() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec("name = r54\nmode = photonic\nrule = 54\nwidth = 70\nsteps = 30\nboundary = periodic\ninitial = random:2\nformats = pgm, csv, json\n");
    let bundle = run_experiment(&s, dir.path()).unwrap();
    for format in [Format::Pgm, Format::Csv, Format::Json] {
        let back = import_diagram(&dir.path().join(format!("r54.{}", format.extension())), format, Boundary::Periodic).unwrap();
        assert_eq!(back.rows(), bundle.diagram.rows(), "{format}");
    }
    let json = import_diagram(&dir.path().join("r54.json"), Format::Json, Boundary::FixedDead).unwrap();
    assert_eq!(json.intensities(), bundle.diagram.intensities());
}
