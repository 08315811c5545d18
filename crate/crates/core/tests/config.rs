use hyuntil::cert::{CheckVerdict, EciVariant};
use hyuntil::config::parse;
use hyuntil::run::{certify, Settings, Theorem};

const PLANAR: &str = r#"
name = "planar-toml"
coords = ["x1", "x2"]
x0 = [0.5, -1.5]
[system]
C = "x1 >= 0 & x1 >= x2"
F = ["-x1 - x2", "x1 - x2"]
D = "x1 == 0 & x2 <= 0"
G = ["-x2 / sqrt(2)", "-x2 / sqrt(2)"]
[grid]
lo = [-0.5, -3.0]
hi = [2.0, 2.0]
[pre_eci]
O = "x1 >= 0 & x1 <= 1 & x2 <= -1"
A = "x1 >= 0 & x2 >= -0.5"
v = "x1^2 + x2^2"
f_c = "-2 * y"
r1 = 0.25
w = "-x2"
f_d = "min(z, z / 2)"
r2 = 0.5
variant = "3d"
[settings]
grid_res = 32
"#;

#[test]
fn pre_eci_table_matches_builtin_verdict() {
    let (s, set) = parse(PLANAR).unwrap();
    let set = set.unwrap();
    assert_eq!(set.grid_res, 32);
    let p = s.pre_eci.as_ref().unwrap();
    assert_eq!(p.variant, EciVariant::D);
    assert_eq!(p.cert.r1, 0.25);
    let out = certify(&s, Theorem::PreEci, None, &set).unwrap();
    assert_eq!(out.reports[0].verdict, CheckVerdict::Pass);
}

const BALL: &str = r#"
name = "ball-toml"
coords = ["x1", "x2"]
[params]
gamma = 1.0
lambda = 0.5
[system]
C = "x1 >= 0"
F = ["x2", "-gamma"]
D = "x1 == 0 & x2 <= 0"
G = ["0", "-lambda * x2"]
[grid]
lo = [-0.5, -4.0]
hi = [5.0, 4.0]
[pre_fta]
O = "x1 == 0 & x2 >= 0.5 & x2 <= 3"
A = "x2 <= 0"
V = "max(x2, 0)"
W = "max(x2, 0)"
c1 = 1.0
c = 1.0
r = 3.0
"#;

#[test]
fn pre_fta_table_with_defaults() {
    let (s, set) = parse(BALL).unwrap();
    assert!(set.is_none());
    let f = &s.pre_fta.as_ref().unwrap().cert;
    assert_eq!((f.c1, f.c2, f.c, f.r), (1.0, 0.0, 1.0, 3.0));
    assert!(f.n.contains(&[7.0, -7.0]));
    assert_eq!(s.x0, vec![2.25, 0.0]);
    let set = Settings {
        grid_res: 24,
        ..Settings::default()
    };
    let out = certify(&s, Theorem::PreFta, None, &set).unwrap();
    assert_eq!(out.reports[0].verdict, CheckVerdict::Pass);
}

#[test]
fn unknown_keys_in_flattened_tables_are_rejected() {
    assert!(parse(&PLANAR.replace("r2 = 0.5", "r2 = 0.5\nr3 = 1")).is_err());
    assert!(parse(&BALL.replace("c = 1.0", "c = 1.0\ncc = 2")).is_err());
    assert!(parse(&PLANAR.replace("variant = \"3d\"", "variant = \"3e\"")).is_err());
    // missing required key
    assert!(parse(&BALL.replace("c1 = 1.0\n", "")).is_err());
}

#[test]
fn discrete_coordinates() {
    let src = r#"
name = "two-mode"
coords = ["h", "z"]
[discrete]
h = [0, 1]
[system]
C = "h == 0 & z >= 0 | h == 1 & z <= 1"
F = ["0", "1 - 2 * h"]
D = "h == 0 & z <= 0 | h == 1 & z >= 1"
G = ["1 - h", "z"]
[grid]
lo = [0, -1]
hi = [1, 2]
"#;
    let (s, _) = parse(src).unwrap();
    assert!(s.system.in_c(&[1.0, 0.5]));
    assert!(s.system.in_d(&[1.0, 1.0]));
    assert!(parse(&src.replace("h = [0, 1]", "q = [0, 1]")).is_err());
}
