mod common;

use common::quick;
use hyuntil::cert::{CheckVerdict, OracleVerdict};
use hyuntil::monitor::{UntilMode, Verdict};
use hyuntil::run::{certify, monitor, Theorem};
use hyuntil::scenarios::by_id;
use hyuntil::sim::simulate;

fn verdict(id: &str, th: Theorem) -> CheckVerdict {
    let s = by_id(id).unwrap();
    certify(&s, th, None, &quick()).unwrap().reports[0].verdict
}

fn monitored(id: &str) -> Verdict {
    monitor(&by_id(id).unwrap(), None, &quick()).unwrap().verdict
}

#[test]
fn timer_and_ball_weak_until() {
    assert_eq!(monitored("timer"), Verdict::Satisfied);
    assert_eq!(verdict("timer", Theorem::Weak), CheckVerdict::Pass);
    assert_eq!(monitored("bouncing-ball"), Verdict::Satisfied);
    assert_eq!(verdict("bouncing-ball", Theorem::Weak), CheckVerdict::Pass);
}

#[test]
fn thermostat_strong_until() {
    assert_eq!(monitored("thermostat"), Verdict::Satisfied);
    for th in [
        Theorem::StrongEci,
        Theorem::StrongEciFlows,
        Theorem::StrongEciJumps,
        Theorem::StrongFta,
    ] {
        assert_eq!(verdict("thermostat", th), CheckVerdict::Pass, "{th:?}");
    }
    let s = by_id("thermostat").unwrap();
    let e = s.until.as_ref().unwrap().eci.as_ref().unwrap();
    assert_eq!((e.r1, e.r2), (1.0, 0.5));
    assert_eq!(s.until.as_ref().unwrap().fta.as_ref().unwrap().c, 0.5);
}

#[test]
fn thermostat_first_jump_switches_heater_off_at_zmax() {
    let s = by_id("thermostat").unwrap();
    let arcs = simulate(&s.system, &[1.0, 0.6], &quick().budget, quick().policy).unwrap();
    let post = &arcs[0].segments[1].samples[0].x;
    assert_eq!(post[0], 0.0);
    assert!((post[1] - 1.0).abs() < 1e-9, "{post:?}");
}

#[test]
fn planar_pre_eci() {
    assert_eq!(verdict("planar", Theorem::PreEci), CheckVerdict::Pass);
    let s = by_id("planar").unwrap();
    let out = certify(&s, Theorem::PreToNonpre, None, &quick()).unwrap();
    // O u A is not forward invariant for the spiral; the half plane is
    assert_eq!(out.reports[0].verdict, CheckVerdict::Fail);
    assert_eq!(out.reports[1].verdict, CheckVerdict::Pass);
}

#[test]
fn ball_flow_lengths_and_fta() {
    let s = by_id("bouncing-ball").unwrap();
    let out = certify(&s, Theorem::PreEciFlowlengths, None, &quick()).unwrap();
    assert_eq!(out.reports[0].verdict, CheckVerdict::Pass);
    let tau = out.extra["flow_lengths"]["tau_m"].as_f64().unwrap();
    assert!(tau <= 6.6 && tau > 6.0, "{tau}");
    assert_eq!(verdict("bouncing-ball", Theorem::PreFta), CheckVerdict::Pass);
    assert_eq!(verdict("bouncing-ball", Theorem::PreFtaJumps), CheckVerdict::Pass);
}

#[test]
fn counterexamples() {
    assert_eq!(monitored("cx-weak"), Verdict::Satisfied);
    assert_eq!(verdict("cx-weak", Theorem::Weak), CheckVerdict::Fail);
    let o = certify(&by_id("cx-weak").unwrap(), Theorem::Oracle, None, &quick()).unwrap();
    let w = o.oracle.unwrap();
    assert_eq!(w.verdict, OracleVerdict::Violated);
    assert!(w.witness.unwrap().x[0].abs() <= 1e-6);

    assert_eq!(monitored("cx-strong"), Verdict::Satisfied);
    assert_eq!(verdict("cx-strong", Theorem::StrongEci), CheckVerdict::Fail);
    let o = certify(&by_id("cx-strong").unwrap(), Theorem::Oracle, None, &quick()).unwrap();
    assert_eq!(o.oracle.unwrap().verdict, OracleVerdict::Violated);

    let r = &certify(&by_id("cx-zeno").unwrap(), Theorem::PreEci, None, &quick())
        .unwrap()
        .reports[0];
    assert_eq!(r.verdict, CheckVerdict::Fail);
    assert_eq!(r.item("3-G(S2)").unwrap().verdict, CheckVerdict::Fail);
    let o = certify(&by_id("cx-zeno").unwrap(), Theorem::Oracle, None, &quick()).unwrap();
    assert_eq!(o.oracle.unwrap().verdict, OracleVerdict::Violated);
}

#[test]
fn strong_monitor_on_weak_scenario() {
    // the timer always reaches x = 1, so the strong form holds as well
    let s = by_id("timer").unwrap();
    let r = monitor(&s, Some(UntilMode::Strong), &quick()).unwrap();
    assert_eq!(r.mode, UntilMode::Strong);
    assert_eq!(r.verdict, Verdict::Satisfied);
}
