mod oracle;

use oracle::{divisor, positive_mass, rr_fixtures, Oracle};
use scaling_site::curve::Divisor;
use scaling_site::rational::{int, pow_rational};
use scaling_site::riemann_roch::dim_filtration;

fn all_fixtures() -> Vec<Divisor> {
    let mut out = rr_fixtures();
    let mirrors: Vec<Divisor> = out.iter().map(Divisor::neg).collect();
    out.extend(mirrors);
    out.push(divisor(3, &[("2", "-1"), ("5/2", "1")]));
    out.push(divisor(2, &[("5/4", "1"), ("3/2", "-1/2"), ("7/4", "1/4")]));
    out
}

#[test]
fn search_matches_exhaustive_enumeration() {
    let mut checked = 0;
    for d in all_fixtures() {
        let mass = positive_mass(&d);
        for n in 0..=8u32 {
            if mass.clone() * pow_rational(d.prime().get(), n as i64) > int(200) {
                break;
            }
            let (expected, _) = Oracle::new(&d, n).dimension();
            let got = dim_filtration(&d, n);
            assert_eq!(got, expected, "{d} at n={n}");
            checked += 1;
        }
    }
    assert!(checked > 60, "only {checked} levels checked");
}
