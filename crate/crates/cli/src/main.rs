fn main() {
    use sb_lattice::{curve::validate_spec, solution::SolutionState, C64};
    let e = |th: f64| C64::from_polar(1.0, th);
    let spec = validate_spec(&[e(0.5), e(-0.5), e(2.0), e(-2.0)], 1).unwrap();
    println!("branch points sorted: {:?}", spec.branch_points());
    // candidate divisor points: on the unit circle in the spectral gap, both sheets,
    // plus an off-circle generic point
    for (zn, sheet) in [(e(1.25), 1i8), (e(1.25), -1), (e(-1.25), 1), (C64::new(0.3, 0.4), 1)] {
        let mu = match spec.surface_point(zn, sheet) { Ok(m) => m, Err(er) => { println!("{zn} sheet {sheet}: {er}"); continue } };
        let st = match SolutionState::init(&spec, None, vec![mu], C64::new(0.6, 0.3), 0, 1e-10, 1e-13) {
            Ok(s) => s, Err(er) => { println!("{zn} sheet {sheet}: init failed {er}"); continue }
        };
        let growth = (-st.growth_log).exp();
        let mut mods = Vec::new();
        let mut ok = true;
        for n in -20..=20 {
            match st.alpha_n(n) {
                Ok(a) => mods.push(a.norm()),
                Err(er) => { println!("alpha({n}) failed: {er}"); ok = false; break; }
            }
        }
        if !ok { continue; }
        let mx = mods.iter().cloned().fold(0.0f64, f64::max);
        let mn = mods.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("mu z={zn:.4} sheet={sheet}: |growth|-1 = {:.3e}, max/min-1 = {:.3e}",
                 (growth.norm()-1.0).abs(), mx/mn - 1.0);
    }
}
