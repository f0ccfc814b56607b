//! One runner per experiment kind. Runners fill an [`Artifacts`] and leave
//! all file output to the caller.

use std::f64::consts::PI;

use num_complex::Complex64;
use scv_core::bishop::{
    fill_wedge_check, foliation_check, foliation_edge_samples, BishopProblem, DiscFamily,
    FillOptions, FoliationGrid, FoliationOptions,
};
use scv_core::circle::{hilbert_transform, poisson_extend, CircleFunction};
use scv_core::domains::{restricted_levi_min, DomainSpec};
use scv_core::exec::map_indexed;
use scv_core::jet::{to_real, RealPoly};
use scv_core::kobayashi::{
    decreasing_sweep, exact_metric, extremal_disc_search, sandwich_sweep, MetricQuery, SandwichRow,
    SearchOptions,
};
use scv_core::maps::{BallAutomorphism, Identity, PointMap, RadialWarp, SqrtWarp};
use scv_core::regularity::{
    bootstrap_schedule, harmonic_measure, modulus_of_continuity_fit, psh_power_check,
    vanishing_rate_fit, ModulusOptions, RayOptions,
};
use scv_core::wedge::{EdgeConfig, TotallyRealGraph, WedgeSpec};
use scv_core::{Error, Exec, Result};

use crate::config::{DiscsParams, DomainsAuditParams, KobayashiParams, RegularityParams};
use crate::output::{complex_cells, num, Artifacts, Table};

fn real_cells(x: &[f64]) -> Vec<String> {
    x.iter().map(|v| num(*v)).collect()
}

fn real_columns(mut t: Table, prefix: &str, n: usize) -> Table {
    for k in 0..n {
        t.header.push(format!("{prefix}{k}"));
    }
    t
}

fn complex_of(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|[a, b]| Complex64::new(*a, *b)).collect()
}

pub fn discs(p: &DiscsParams, seed: u64, exec: Exec, a: &mut Artifacts) -> Result<()> {
    let graph = match &p.edge {
        EdgeConfig::Flat { n } => TotallyRealGraph::flat(*n),
        EdgeConfig::PerturbedFlat { n, epsilon } => TotallyRealGraph::quadratic(*n, *epsilon),
        _ => {
            return Err(Error::InvalidSpec(
                "disc families need a graph edge over iR^n (flat or perturbed-flat)".into(),
            ))
        }
    };
    let n = graph.n();
    let template = BishopProblem::new(graph.clone(), p.circle_samples, vec![0.0; n], vec![0.0; n])?;
    let fam = DiscFamily::solve(&template, p.grid, exec);

    let mut members = real_columns(
        real_columns(
            Table::new(
                "members",
                &[
                    "member",
                    "status",
                    "iterations",
                    "residual",
                    "attachment_residual",
                ],
            ),
            "c",
            n,
        ),
        "t",
        n,
    );
    let params = p.grid.members(n);
    let mut unsolved = Vec::new();
    for (i, (m, (c, t))) in fam.members.iter().zip(&params).enumerate() {
        let mut row = vec![i.to_string()];
        match m {
            Ok(m) => row.extend([
                "solved".into(),
                m.iterations.to_string(),
                num(m.residual),
                num(m.attachment_residual),
            ]),
            Err(e) => {
                unsolved.push(c.iter().chain(t).copied().collect());
                row.extend([
                    format!("failed: {e}"),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
        }
        row.extend(real_cells(c));
        row.extend(real_cells(t));
        members.push(row);
    }
    let solved: Vec<_> = fam.solved().collect();
    let max_iter = solved.iter().map(|m| m.iterations).max().unwrap_or(0);
    let max_res = solved.iter().map(|m| m.residual).fold(0.0, f64::max);
    let max_att = solved
        .iter()
        .map(|m| m.attachment_residual)
        .fold(0.0, f64::max);
    a.count(
        "members_solved",
        solved.len(),
        &format!("= {}", params.len()),
        "members.csv: count(status = solved)",
    );
    a.count(
        "max_iterations",
        max_iter,
        "<= 50",
        "members.csv: max(iterations)",
    );
    a.metric(
        "max_residual",
        max_res,
        "< 1e-10",
        "members.csv: max(residual)",
    );
    a.metric(
        "max_attachment_residual",
        max_att,
        "< 1e-8",
        "members.csv: max(attachment_residual)",
    );
    a.tables.push(members);
    if !unsolved.is_empty() {
        a.fail("disc family members without a solution (c, t)", unsolved);
    }
    if max_iter > 50 || !(max_res < 1e-10) || !(max_att < 1e-8) {
        let worst: Vec<Vec<f64>> = solved
            .iter()
            .filter(|m| {
                m.iterations > 50 || !(m.residual < 1e-10) || !(m.attachment_residual < 1e-8)
            })
            .map(|m| m.c.iter().chain(&m.t).copied().collect())
            .collect();
        a.warn("members above the solver tolerances (c, t)", worst);
    }

    let wedge = WedgeSpec::new(graph.edge_spec(), p.delta)?;
    let fill = fill_wedge_check(
        &fam,
        &wedge,
        p.fill_samples,
        seed,
        &FillOptions::default(),
        exec,
    )?;
    let mut ft = real_columns(Table::new("fill", &["sample", "covered"]), "x", 2 * n);
    for (i, (x, ok)) in fill.outcomes.iter().enumerate() {
        let mut row = vec![i.to_string(), (*ok as u8).to_string()];
        row.extend(real_cells(x));
        ft.push(row);
    }
    a.tables.push(ft);
    a.count(
        "fill_attempted",
        fill.attempted,
        &format!("= {}", p.fill_samples),
        "fill.csv: count(rows)",
    );
    a.metric(
        "fill_coverage",
        fill.coverage,
        &format!(">= {}", p.min_coverage),
        "fill.csv: mean(covered)",
    );
    if !(fill.coverage >= p.min_coverage) {
        a.fail(
            format!(
                "wedge samples not reached by the family (coverage {})",
                fill.coverage
            ),
            fill.failures.clone(),
        );
    }

    if n >= 2 {
        let t0 =
            p.t0.clone()
                .unwrap_or_else(|| (0..n).map(|k| if k == 0 { 0.2 } else { 0.1 }).collect());
        let grid = FoliationGrid::uniform(t0, p.sigma_max, p.foliation_points)?;
        let pts = foliation_edge_samples(
            &template,
            &grid,
            p.sigma_max,
            p.foliation_samples,
            seed ^ 0x5f0f,
            exec,
        )?;
        let fol = foliation_check(&template, &grid, &pts, &FoliationOptions::default(), exec)?;
        let mut t = Table::new("foliation", &["sample", "multiplicity"]).complex_columns("z", n);
        for (i, (z, m)) in pts.iter().zip(&fol.multiplicities).enumerate() {
            let mut row = vec![i.to_string(), m.to_string()];
            row.extend(complex_cells(z));
            t.push(row);
        }
        a.tables.push(t);
        a.metric(
            "foliation_fraction_single",
            fol.fraction_single,
            ">= 0.99",
            "foliation.csv: mean(multiplicity = 1)",
        );
        a.count(
            "foliation_max_multiplicity",
            fol.max_multiplicity,
            "= 1",
            "foliation.csv: max(multiplicity)",
        );
        if !(fol.fraction_single >= 0.99) {
            let bad = pts
                .iter()
                .zip(&fol.multiplicities)
                .filter(|(_, m)| **m != 1)
                .map(|(z, _)| to_real(z))
                .collect();
            a.fail("edge points not covered exactly once by the foliation", bad);
        }
    }
    Ok(())
}

/// `min exact / bracket` over the first `k` rows.
fn min_ratio(rows: &[SandwichRow], k: usize, f: impl Fn(&SandwichRow) -> f64) -> f64 {
    rows[..k]
        .iter()
        .map(|r| r.exact / f(r))
        .fold(f64::INFINITY, f64::min)
}

pub fn kobayashi(p: &KobayashiParams, seed: u64, exec: Exec, a: &mut Artifacts) -> Result<()> {
    if p.samples == 0 {
        return Err(Error::InvalidSpec(
            "kobayashi.samples must be positive".into(),
        ));
    }
    for &n in &p.dims {
        // substreams are indexed, so the first half of the doubled sweep is the base sweep
        let rep = sandwich_sweep(n, 2 * p.samples, seed, p.search_degree, exec)?;
        let name = format!("sandwich_n{n}");
        let file = format!("{name}.csv");
        let mut t = Table::new(
            name,
            &[
                "sample",
                "exact",
                "sibony",
                "sibony_quadratic",
                "localization",
                "inscribed",
                "disc_upper",
            ],
        )
        .complex_columns("z", n)
        .complex_columns("v", n);
        for (i, r) in rep.rows.iter().enumerate() {
            let mut row = vec![
                i.to_string(),
                num(r.exact),
                num(r.sibony),
                num(r.sibony_quadratic),
                num(r.localization),
                num(r.inscribed),
                r.disc_upper.map(num).unwrap_or_default(),
            ];
            row.extend(complex_cells(&r.z));
            row.extend(complex_cells(&r.v));
            t.push(row);
        }
        a.tables.push(t);
        let (k1, k2) = (p.samples, 2 * p.samples);
        let brackets: [(&str, fn(&SandwichRow) -> f64, bool); 3] = [
            ("sibony", |r| r.sibony, true),
            ("localization", |r| r.localization, true),
            ("sibony_quadratic", |r| r.sibony_quadratic, false),
        ];
        for (label, f, gate) in brackets {
            let c1 = min_ratio(&rep.rows, k1, f);
            let c2 = min_ratio(&rep.rows, k2, f);
            let drift = (c1 - c2).abs() / c1;
            a.metric(
                &format!("{label}_constant_n{n}_{k1}"),
                c1,
                "> 0",
                &format!("{file}: min(exact / {label}) over sample < {k1}"),
            );
            a.metric(
                &format!("{label}_constant_n{n}_{k2}"),
                c2,
                "> 0",
                &format!("{file}: min(exact / {label})"),
            );
            a.metric(
                &format!("{label}_drift_n{n}"),
                drift,
                "< 0.1",
                &format!("{file}: |c_{k1} - c_{k2}| / c_{k1}"),
            );
            if !(c2 > 0.0) {
                a.fail(
                    format!("{label} bracket constant is not positive (n = {n})"),
                    vec![],
                );
            } else if !(drift < 0.1) && gate {
                a.warn(
                    format!("{label} constant drifts by {drift} under sample doubling (n = {n})"),
                    vec![],
                );
            } else if !(drift < 0.1) {
                a.warn(
                    format!("{label} constant drifts by {drift} under sample doubling (n = {n}); this bracket is quadratic in v"),
                    vec![],
                );
            }
        }
        a.count(
            &format!("upper_violations_n{n}"),
            rep.upper_violations,
            "= 0",
            &format!("{file}: count(exact > inscribed (1 + 1e-9))"),
        );
        if rep.upper_violations > 0 {
            let pts = rep
                .rows
                .iter()
                .filter(|r| r.exact > r.inscribed * (1.0 + 1e-9))
                .map(|r| [to_real(&r.z), to_real(&r.v)].concat())
                .collect();
            a.fail(
                format!("exact metric above the inscribed-ball bound (n = {n})"),
                pts,
            );
        }
        if p.search_degree.is_some() {
            let bad: Vec<&SandwichRow> = rep
                .rows
                .iter()
                .filter(|r| r.disc_upper.is_some_and(|d| d < r.exact * (1.0 - 1e-9)))
                .collect();
            a.count(
                &format!("disc_upper_violations_n{n}"),
                bad.len(),
                "= 0",
                &format!("{file}: count(disc_upper < exact (1 - 1e-9))"),
            );
            if !bad.is_empty() {
                a.fail(
                    format!("disc search below the exact metric (n = {n})"),
                    bad.iter()
                        .map(|r| [to_real(&r.z), to_real(&r.v)].concat())
                        .collect(),
                );
            }
        }

        let dec = decreasing_sweep(n, p.decreasing_samples, seed, exec)?;
        let name = format!("decreasing_n{n}");
        let file = format!("{name}.csv");
        let mut t = Table::new(name, &["sample", "map", "source", "target", "holds"])
            .complex_columns("z", n)
            .complex_columns("v", n);
        for (i, r) in dec.iter().enumerate() {
            let mut row = vec![
                i.to_string(),
                r.map.clone(),
                num(r.source),
                num(r.target),
                (r.holds as u8).to_string(),
            ];
            row.extend(complex_cells(&r.z));
            row.extend(complex_cells(&r.v));
            t.push(row);
        }
        a.tables.push(t);
        let bad: Vec<_> = dec.iter().filter(|r| !r.holds).collect();
        a.count(
            &format!("decreasing_violations_n{n}"),
            bad.len(),
            "= 0",
            &format!("{file}: count(holds = 0)"),
        );
        if !bad.is_empty() {
            a.fail(
                format!("decreasing property violated (n = {n})"),
                bad.iter()
                    .map(|r| [to_real(&r.z), to_real(&r.v)].concat())
                    .collect(),
            );
        }
    }

    if !p.extremal.is_empty() {
        let mut t = Table::new(
            "extremal",
            &[
                "case",
                "n",
                "degree",
                "lambda",
                "exact",
                "gap",
                "tolerance",
                "fallback",
            ],
        );
        let opts = SearchOptions {
            exec,
            ..Default::default()
        };
        for (i, case) in p.extremal.iter().enumerate() {
            let z = complex_of(&case.z);
            let v = complex_of(&case.v);
            let n = z.len();
            let q = MetricQuery::new(DomainSpec::ball(n), z.clone(), v.clone())?;
            let w = extremal_disc_search(&q, case.degree, case.restarts, seed ^ i as u64, &opts)?;
            let exact = exact_metric(&q).expect("ball has a closed form");
            let gap = w.lambda - exact;
            let tol = if n == 1 { 1e-3 } else { 1e-2 };
            t.push(vec![
                i.to_string(),
                n.to_string(),
                case.degree.to_string(),
                num(w.lambda),
                num(exact),
                num(gap),
                num(tol),
                (w.fallback as u8).to_string(),
            ]);
            a.metric(
                &format!("extremal_gap_{i}"),
                gap,
                &format!("<= {tol}"),
                &format!("extremal.csv: gap where case = {i}"),
            );
            if gap < -1e-9 * exact.max(1.0) {
                a.fail(
                    format!("extremal disc beats the exact metric (case {i})"),
                    vec![[to_real(&z), to_real(&v)].concat()],
                );
            } else if !(gap <= tol) {
                a.warn(
                    format!(
                        "degree-{} disc stays {gap} above the exact metric (case {i})",
                        case.degree
                    ),
                    vec![[to_real(&z), to_real(&v)].concat()],
                );
            }
        }
        a.tables.push(t);
    }
    Ok(())
}

/// `ρ = ‖x‖²`, the squared distance to the flat edge `iℝⁿ`.
fn flat_edge_model(n: usize) -> RealPoly {
    (0..n).fold(RealPoly::zero(n), |acc, k| {
        acc.add(&RealPoly::x(n, k).mul(&RealPoly::x(n, k)))
    })
}

/// Probes of the flat model away from the edge, from a fixed lattice.
fn flat_probes(n: usize) -> Vec<Vec<Complex64>> {
    (0..64)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let s = (i * (k + 3)) as f64 * 0.37;
                    Complex64::new(0.02 + 0.2 * (0.5 + 0.5 * s.sin()), s.cos())
                })
                .collect()
        })
        .collect()
}

pub fn regularity(p: &RegularityParams, seed: u64, exec: Exec, a: &mut Artifacts) -> Result<()> {
    let n = p.n;
    let ball = DomainSpec::ball(n);
    let rho = flat_edge_model(n);
    let probes = flat_probes(n);
    let mopts = ModulusOptions::default();
    let mut table = Table::new(
        "regularity",
        &[
            "theta",
            "power",
            "beta",
            "alpha",
            "fitted_alpha",
            "fitted_r2",
            "min_eigenvalue",
            "certified",
        ],
    );
    let mut levels = Table::new("modulus_levels", &["map", "delta", "sup_ratio"]);
    for &theta in &p.thetas {
        let step = bootstrap_schedule(theta, p.extended)?;
        let cert = psh_power_check(&rho, theta, &probes, p.extended)?;
        let warp = RadialWarp {
            n,
            alpha: step.alpha,
        };
        let m = modulus_of_continuity_fit(&warp, &ball, seed, &mopts, exec)?;
        for (d, s) in &m.levels {
            levels.push(vec![format!("warp-theta-{theta}"), num(*d), num(*s)]);
        }
        table.push(vec![
            num(theta),
            num(step.power),
            num(step.beta),
            num(step.alpha),
            num(m.fit.exponent),
            num(m.fit.r2),
            num(cert.min_eigenvalue),
            (cert.passed as u8).to_string(),
        ]);
        let src = format!("regularity.csv: row theta = {theta}");
        a.metric(
            &format!("fitted_alpha_theta_{theta}"),
            m.fit.exponent,
            &format!("{} +- 0.03", step.alpha.min(1.0)),
            &src,
        );
        a.metric(
            &format!("psh_min_eigenvalue_theta_{theta}"),
            cert.min_eigenvalue,
            ">= -1e-8",
            &src,
        );
        if !cert.passed {
            a.fail(
                format!("rho^theta is not plurisubharmonic at theta = {theta}"),
                vec![cert.witness.clone()],
            );
        }
        if !((m.fit.exponent - step.alpha.min(1.0)).abs() <= 0.03) {
            a.warn(
                format!(
                    "modulus fit {} misses alpha = {} (theta = {theta})",
                    m.fit.exponent, step.alpha
                ),
                vec![],
            );
        }
    }
    a.tables.push(table);

    let mut auto = vec![Complex64::new(0.0, 0.0); n];
    auto[0] = Complex64::new(0.5, 0.0);
    let controls: Vec<(&str, f64, Box<dyn PointMap>)> = vec![
        ("identity", 1.0, Box::new(Identity { n })),
        ("automorphism", 1.0, Box::new(BallAutomorphism::new(auto)?)),
        ("sqrt-warp", 0.5, Box::new(SqrtWarp { n })),
    ];
    let mut ct = Table::new("controls", &["map", "expected_alpha", "fitted_alpha", "r2"]);
    for (name, expected, f) in &controls {
        let m = modulus_of_continuity_fit(f.as_ref(), &ball, seed, &mopts, exec)?;
        for (d, s) in &m.levels {
            levels.push(vec![name.to_string(), num(*d), num(*s)]);
        }
        ct.push(vec![
            name.to_string(),
            num(*expected),
            num(m.fit.exponent),
            num(m.fit.r2),
        ]);
        a.metric(
            &format!("control_alpha_{name}"),
            m.fit.exponent,
            &format!("{expected} +- 0.03"),
            &format!("controls.csv: fitted_alpha where map = {name}"),
        );
        if !((m.fit.exponent - expected).abs() <= 0.03) {
            a.fail(format!("modulus fitter misses the control {name}"), vec![]);
        }
    }
    a.tables.push(ct);
    a.tables.push(levels);

    // harmonic measure of the lower arc, vanishing on the upper one
    let phi = |z: Complex64| harmonic_measure(PI, 2.0 * PI, z).max(0.0);
    let ropts = RayOptions {
        rays: p.rays,
        s0: p.s0,
        points: p.ray_points,
    };
    let fit = vanishing_rate_fit(&phi, (0.0, PI), &ropts)?;
    let mut vt = Table::new("vanishing", &["ray", "s", "value"]);
    let mut vf = Table::new("vanishing_fits", &["ray", "exponent", "constant", "r2"]);
    for (r, (prof, f)) in fit.profiles.iter().zip(&fit.fits).enumerate() {
        for (s, v) in prof.s.iter().zip(&prof.values) {
            vt.push(vec![r.to_string(), num(*s), num(*v)]);
        }
        vf.push(vec![
            r.to_string(),
            num(f.exponent),
            num(f.constant),
            num(f.r2),
        ]);
    }
    a.tables.push(vt);
    a.tables.push(vf);
    a.metric(
        "vanishing_worst_exponent",
        fit.worst.exponent,
        ">= 0.98",
        "vanishing_fits.csv: min(exponent)",
    );
    if !(fit.worst.exponent >= 0.98) {
        a.fail("harmonic-measure vanishing rate below 0.98", vec![]);
    }
    Ok(())
}

pub fn domains_audit(
    p: &DomainsAuditParams,
    seed: u64,
    exec: Exec,
    a: &mut Artifacts,
) -> Result<()> {
    if p.domains.is_empty() {
        return Err(Error::InvalidSpec(
            "domains-audit needs at least one domain".into(),
        ));
    }
    for (i, cfg) in p.domains.iter().enumerate() {
        let d = DomainSpec::from_config(cfg)?;
        let pts = d.boundary_samples(p.samples, seed, exec)?;
        let levi = map_indexed(exec, pts.len(), |k| restricted_levi_min(&d, &pts[k]))
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        let name = format!("audit_{i}");
        let mut t =
            Table::new(name.clone(), &["sample", "rho", "levi_min"]).complex_columns("p", d.n);
        for (k, (z, l)) in pts.iter().zip(&levi).enumerate() {
            let mut row = vec![k.to_string(), num(d.value(z)), num(*l)];
            row.extend(complex_cells(z));
            t.push(row);
        }
        a.tables.push(t);
        let margin = levi.iter().copied().fold(f64::INFINITY, f64::min);
        a.metric(
            &format!("psc_margin_{i}"),
            margin,
            "> 0",
            &format!("{name}.csv: min(levi_min) [{}]", d.name),
        );
        if !(margin > 0.0) {
            let bad = pts
                .iter()
                .zip(&levi)
                .filter(|(_, l)| !(**l > 0.0))
                .map(|(z, _)| to_real(z))
                .collect();
            a.fail(
                format!(
                    "domain {i} ({}) is not strictly pseudoconvex at these points",
                    d.name
                ),
                bad,
            );
        }
    }
    Ok(())
}

/// Trig-polynomial suite for the circle calculus at `N = 256`.
pub fn selftest(exec: Exec, a: &mut Artifacts) -> Result<()> {
    const N: usize = 256;
    let degrees = [0usize, 1, 2, 5, 16, 33, 64, 64];
    let radii = [0.0, 0.5, 0.9, 0.99];
    let rows = map_indexed(exec, degrees.len(), |case| -> Result<[f64; 3]> {
        let d = degrees[case];
        let coef: Vec<(f64, f64)> = (0..=d)
            .map(|k| {
                let s = (case * 131 + k * 17) as f64;
                (
                    (0.9 * s).sin() / (1.0 + k as f64 * 0.1),
                    (1.3 * s + 0.4).cos() / (1.0 + k as f64 * 0.1),
                )
            })
            .collect();
        let eval = |th: f64, r: f64, conj: bool| -> f64 {
            coef.iter()
                .enumerate()
                .map(|(k, (ak, bk))| {
                    let kt = k as f64 * th;
                    let rk = r.powi(k as i32);
                    match (k, conj) {
                        (0, false) => *ak,
                        (0, true) => 0.0,
                        (_, false) => rk * (ak * kt.cos() + bk * kt.sin()),
                        (_, true) => rk * (ak * kt.sin() - bk * kt.cos()),
                    }
                })
                .sum()
        };
        let u = CircleFunction::from_fn_real(N, |th| eval(th, 1.0, false))?;
        let tu = hilbert_transform(&u)?;
        let h_err = (0..N)
            .map(|j| (tu.samples()[j] - eval(u.angle(j), 1.0, true)).norm())
            .fold(0.0, f64::max);
        let ttu = hilbert_transform(&tu)?;
        let mean = u.mean();
        let i_err = (0..N)
            .map(|j| (ttu.samples()[j] + u.samples()[j] - mean).norm())
            .fold(0.0, f64::max);
        let mut p_err: f64 = 0.0;
        for r in radii {
            for j in 0..16 {
                let th = 2.0 * PI * (j as f64 + 0.3) / 16.0;
                let got = poisson_extend(&u, Complex64::from_polar(r, th))?;
                p_err = p_err.max((got - eval(th, r, false)).norm());
            }
        }
        Ok([h_err, p_err, i_err])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(
        "selftest",
        &[
            "case",
            "degree",
            "hilbert_error",
            "poisson_error",
            "involution_error",
        ],
    );
    for (case, (d, r)) in degrees.iter().zip(&rows).enumerate() {
        t.push(vec![
            case.to_string(),
            d.to_string(),
            num(r[0]),
            num(r[1]),
            num(r[2]),
        ]);
    }
    a.tables.push(t);
    for (k, label) in ["hilbert", "poisson", "involution"].iter().enumerate() {
        let worst = rows.iter().map(|r| r[k]).fold(0.0, f64::max);
        a.metric(
            &format!("max_{label}_error"),
            worst,
            "<= 1e-10",
            &format!("selftest.csv: max({label}_error)"),
        );
        if !(worst <= 1e-10) {
            a.fail(
                format!("{label} identity off by {worst} on trig polynomials"),
                vec![],
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let mut a = Artifacts::default();
        selftest(Exec::Sequential, &mut a).unwrap();
        assert!(a.failures.is_empty(), "{:?}", a.failures);
        assert_eq!(a.tables[0].rows.len(), 8);
    }

    #[test]
    fn discs_reject_non_graph_edges() {
        let p: DiscsParams =
            serde_json::from_str(r#"{"edge": {"kind": "polynomial", "phi": []}}"#).unwrap();
        let mut a = Artifacts::default();
        assert!(matches!(
            discs(&p, 0, Exec::Sequential, &mut a),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn audit_reports_ball_margin() {
        let p: DomainsAuditParams =
            serde_json::from_str(r#"{"domains": [{"kind": "ball", "n": 2}], "samples": 16}"#)
                .unwrap();
        let mut a = Artifacts::default();
        domains_audit(&p, 3, Exec::Sequential, &mut a).unwrap();
        assert!(a.failures.is_empty());
        assert_eq!(a.summary[0].metric, "psc_margin_0");
        // the unit ball has restricted Levi form |v|² = 1 on unit tangent vectors
        let m: f64 = a.summary[0].value.parse().unwrap();
        assert!((m - 1.0).abs() < 1e-9, "{m}");
    }
}
