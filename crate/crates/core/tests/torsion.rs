//! Torsion classes and characteristic torsion of the built-in geometries.

use g2va::manifest::{Geometry, Manifest};

fn check(name: &str) {
    let m = Manifest::preset(name).unwrap();
    let geo = Geometry::build(&m, None).unwrap();
    let t = geo.torsion().unwrap();
    let exp = m.expected.clone().unwrap();
    let c = &t.classes;
    println!("{name}: tau0 = {}", c.tau0);
    println!("{name}: tau1 = {}", c.tau1);
    println!("{name}: tau2 = {}", c.tau2);
    println!("{name}: tau3 = {}", c.tau3);
    println!("{name}: H = {}", t.h.as_ref().map(|h| h.to_string()).unwrap_or_default());
    let a = geo.a_parameter(&c.tau0).unwrap();
    println!("{name}: a = {a}");
    assert_eq!(c.tau0, geo.parse_scalar(exp.tau0.as_deref().unwrap()).unwrap(), "tau0");
    assert_eq!(c.tau1, geo.parse_form(exp.tau1.as_deref().unwrap(), "tau1").unwrap(), "tau1");
    assert!(c.tau2.is_zero());
    assert_eq!(c.tau3, geo.parse_form(exp.tau3.as_deref().unwrap(), "tau3").unwrap(), "tau3");
    assert_eq!(t.h.clone().unwrap(), geo.parse_form(exp.h.as_deref().unwrap(), "h").unwrap(), "H");
    assert!(t.integrable_with_closed_h());
    assert_eq!(a, geo.parse_scalar(exp.a.as_deref().unwrap()).unwrap(), "a");
}

#[test]
fn phi1() { check("phi1"); }
#[test]
fn phi2() { check("phi2"); }
#[test]
fn phi3() { check("phi3"); }
#[test]
fn phi4() { check("phi4"); }
#[test]
fn phi5() { check("phi5"); }
