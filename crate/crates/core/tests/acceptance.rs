//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line
//! with the measured quantities; the test fails if any criterion fails.

use std::io::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mce::assembly::{assemble, Model, ProblemCoefficients};
use mce::bench::{
    case_brinkman, case_darcy, case_elasticity, case_stokes, divergence_defect, relative_spread,
    robustness_sweep, run_convergence, run_locking_study, solve_coupling, ConvergenceRecord,
    Scenario,
};
use mce::boundary::{scalar_field, vector_field, BoundaryCondition, BoundaryConditions};
use mce::geometry::Vec2;
use mce::mesh::{subdivide, subdivide_with, BoundarySplit, MacroMesh, SUBTRIANGLE_NODES};
use mce::solver::solve;
use mce::space::{build_space, compute_bubble, ConstraintMode, Enrichment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEVELS: [usize; 4] = [4, 8, 16, 32];
const CI_NODES: usize = 40;
const FROZEN_TIP: f64 = 1.488064416625279;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Written to the unbuffered stream directly so the lines show even when the
/// test harness captures output.
fn report(line: &str) {
    let mut err = std::io::stderr().lock();
    writeln!(err, "{line}").unwrap();
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> (T, Duration) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let start = Instant::now();
    let value = pool.install(f);
    (value, start.elapsed())
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

fn stokes_convergence() -> Outcome {
    let (record, time) = single_threaded(|| run_convergence(&case_stokes(), &LEVELS).unwrap());
    let s = record.slopes;
    let l2p = s.l2_pressure.unwrap();
    let pass = within(s.h1_velocity, 0.8, 1.2)
        && within(s.l2_velocity, 1.8, 2.2)
        && within(l2p, 0.8, 1.2)
        && time < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "slopes H1(u) {:.3} in [0.8,1.2], L2(u) {:.3} in [1.8,2.2], L2(p) {l2p:.3} in [0.8,1.2]; {:.1} s",
            s.h1_velocity,
            s.l2_velocity,
            time.as_secs_f64()
        ),
    )
}

fn darcy_convergence() -> Outcome {
    let (record, time) = single_threaded(|| run_convergence(&case_darcy(), &LEVELS).unwrap());
    let s = record.slopes;
    let p0p = s.projected_pressure.unwrap();
    let pass =
        within(s.l2_velocity, 0.8, 1.2) && within(p0p, 1.8, 2.2) && time < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "slopes L2(u) {:.3} in [0.8,1.2], |pi0 p - p_h| {p0p:.3} in [1.8,2.2]; {:.1} s",
            s.l2_velocity,
            time.as_secs_f64()
        ),
    )
}

fn worst_defect(record: &ConvergenceRecord) -> f64 {
    record
        .rows
        .iter()
        .map(|r| r.divergence_defect)
        .fold(0.0, f64::max)
}

/// Brinkman flow with a zero mean source on the unit square.
fn brinkman_with_source(mode: ConstraintMode) -> f64 {
    let g = |p: Vec2| (p.x - 0.5) * (1.0 + p.y) + (2.0 * std::f64::consts::PI * p.y).sin();
    let subdiv = Arc::new(subdivide(&MacroMesh::unit_square(8).unwrap()).unwrap());
    let bcs = BoundaryConditions::everywhere(BoundaryCondition::no_slip());
    let coeffs = ProblemCoefficients::brinkman(
        0.5,
        2.0,
        vector_field(|p| Vec2::new(1.0 + p.y, -p.x * p.x)),
        scalar_field(g),
        bcs,
    );
    let space = build_space(subdiv, mode, Enrichment::EdgeBubbles, &coeffs.boundary).unwrap();
    let sys = assemble(&space, &coeffs, Model::Brinkman).unwrap();
    let report = solve(&sys).unwrap();
    let u = sys.field_solution(&space, &report.solution);
    divergence_defect(&space, &u.velocity, g)
}

fn divergence_exactness() -> Outcome {
    let stokes = worst_defect(&run_convergence(&case_stokes(), &LEVELS).unwrap());
    let darcy = worst_defect(&run_convergence(&case_darcy(), &LEVELS).unwrap());
    let strong = brinkman_with_source(ConstraintMode::FullDirichlet);
    let weak = brinkman_with_source(ConstraintMode::NormalOnly);
    let coupled = [1.0, 1e-2, 1e-3, 1e-6]
        .map(|mu| {
            solve_coupling(Scenario::Normal, mu, CI_NODES)
                .unwrap()
                .divergence_defect
        })
        .into_iter()
        .fold(0.0, f64::max);
    let worst = [stokes, darcy, strong, weak, coupled]
        .into_iter()
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-9,
        format!(
            "max scaled |div u_h - pi0 g|: stokes {stokes:.1e}, darcy {darcy:.1e}, \
             brinkman g != 0 {strong:.1e} / {weak:.1e}, coupled {coupled:.1e}"
        ),
    )
}

fn locking() -> Outcome {
    let (rows, time) = single_threaded(|| run_locking_study(&[0.4999, 0.49999], &[16]).unwrap());
    let (a, b) = (rows[0], rows[1]);
    let change = (a.compatible_tip - b.compatible_tip).abs() / b.compatible_tip.abs();
    let ratio = b.affine_tip / b.compatible_tip;
    let frozen = (b.compatible_tip - FROZEN_TIP).abs() / FROZEN_TIP;
    let pass = change < 0.02 && ratio < 0.5 && frozen < 1e-8 && time < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "compatible tip {:.6} -> {:.6} (change {:.3}%), affine/compatible {ratio:.3}, \
             regression offset {frozen:.1e}; {:.1} s",
            a.compatible_tip,
            b.compatible_tip,
            100.0 * change,
            time.as_secs_f64()
        ),
    )
}

fn robustness() -> Outcome {
    let lambda = robustness_sweep(case_elasticity, &[1.0, 1e3, 1e6], 16).unwrap();
    let mu = robustness_sweep(|mu| case_brinkman(mu, 1.0), &[0.0, 1e-6, 1e-3], 16).unwrap();
    let lambda_spread = relative_spread(lambda.iter().map(|(_, e)| e.energy));
    let mu_spread = relative_spread(mu.iter().map(|(_, e)| e.energy));
    let mu_l2 = relative_spread(mu.iter().map(|(_, e)| e.l2_velocity));
    outcome(
        lambda_spread < 0.1 && mu_spread < 0.1,
        format!(
            "energy spread over lambda {:.2}%, over mu {:.2}% (L2 velocity over mu {:.2}%)",
            100.0 * lambda_spread,
            100.0 * mu_spread,
            100.0 * mu_l2
        ),
    )
}

/// Degree <= 4 polynomial field with coefficients in [-1, 1].
fn random_polynomial(rng: &mut ChaCha8Rng) -> impl Fn(Vec2) -> Vec2 {
    let terms: Vec<(i32, i32, f64, f64)> = (0..=4)
        .flat_map(|d| (0..=d).map(move |i| (i, d - i)))
        .map(|(i, j)| {
            (
                i,
                j,
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    move |p: Vec2| {
        terms.iter().fold(Vec2::ZERO, |acc, &(i, j, a, b)| {
            let m = p.x.powi(i) * p.y.powi(j);
            acc + Vec2::new(a * m, b * m)
        })
    }
}

/// Three point Gauss rule on [0, 1].
const GAUSS3: [(f64, f64); 3] = [
    (0.1127016653792583, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.8872983346207417, 5.0 / 18.0),
];

fn edge_flux(u: &impl Fn(Vec2) -> Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let normal = Vec2::new(d.y, -d.x);
    GAUSS3
        .iter()
        .map(|&(s, w)| w * u(a + d * s).dot(normal))
        .sum()
}

fn fortin_commuting() -> Outcome {
    let subdiv = Arc::new(subdivide(&MacroMesh::unit_square(4).unwrap()).unwrap());
    let bcs = BoundaryConditions::everywhere(BoundaryCondition::free());
    let space = build_space(
        subdiv,
        ConstraintMode::Unconstrained,
        Enrichment::EdgeBubbles,
        &bcs,
    )
    .unwrap();
    let mesh = space.mesh();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = random_polynomial(&mut rng);
        let raw = space.fortin_interpolate(&u).unwrap();
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.triangle_points(t);
            let fluxes = [
                edge_flux(&u, a, b),
                edge_flux(&u, b, c),
                edge_flux(&u, c, a),
            ];
            let exact: f64 = fluxes.iter().sum();
            let scale: f64 = fluxes.iter().map(|f| f.abs()).sum();
            let discrete = space.macro_divergence(&raw, t).value * mesh.triangle_area(t);
            worst = worst.max((discrete - exact).abs() / scale);
        }
    }
    outcome(
        worst < 1e-10,
        format!("max relative per-triangle mismatch {worst:.1e} over 20 fields"),
    )
}

/// Gradient of the affine function equal to 1 at `one` and 0 at `p`, `q`.
fn hat_gradient(one: Vec2, p: Vec2, q: Vec2) -> Vec2 {
    // g . (one - p) = 1, g . (q - p) = 0
    let (r1, r2) = (one - p, q - p);
    let det = r1.x * r2.y - r1.y * r2.x;
    Vec2::new(r2.y / det, -r2.x / det)
}

/// Divergence of the linear interpolant of `values` on the triangle `points`.
fn linear_divergence(points: [Vec2; 3], values: [Vec2; 3]) -> f64 {
    let g1 = hat_gradient(points[1], points[2], points[0]);
    let g2 = hat_gradient(points[2], points[0], points[1]);
    let g0 = hat_gradient(points[0], points[1], points[2]);
    values[0].dot(g0) + values[1].dot(g1) + values[2].dot(g2)
}

/// Largest deviation of the six subtriangle divergences from `target`.
fn subtriangle_deviation(nodes: [Vec2; 7], values: [Vec2; 7], target: f64) -> f64 {
    SUBTRIANGLE_NODES
        .iter()
        .map(|s| (linear_divergence(s.map(|i| nodes[i]), s.map(|i| values[i])) - target).abs())
        .fold(0.0, f64::max)
}

fn single_triangle(corners: [Vec2; 3]) -> MacroMesh {
    MacroMesh::from_parts(corners.to_vec(), vec![[0, 1, 2]], &[], "wall").unwrap()
}

fn bubble_oracle() -> Outcome {
    let corners = [
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
    ];
    let subdiv = subdivide(&single_triangle(corners)).unwrap();
    let bottom = (0..3)
        .find(|&e| subdiv.mesh().edge_points(e).iter().all(|p| p.y == 0.0))
        .unwrap();
    let side = &compute_bubble(&subdiv, bottom).unwrap().sides[0];
    // the centroid value makes the divergence 1 on both children away from the bottom edge
    let c = subdiv.centroid(0);
    let g1 = hat_gradient(c, corners[1], corners[2]);
    let g2 = hat_gradient(c, corners[2], corners[0]);
    let det = g1.x * g2.y - g1.y * g2.x;
    let oracle = Vec2::new((g2.y - g1.y) / det, (g1.x - g2.x) / det);
    let um = side.centroid_value;
    let reference_error = (um - oracle)
        .norm()
        .max((um - Vec2::new(1.0 / 3.0, -2.0 / 3.0)).norm());
    let reference_divergence = subtriangle_deviation(subdiv.local_nodes(0), side.node_values, 1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 100 {
        let pts: [Vec2; 3] = std::array::from_fn(|_| {
            Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
        });
        let area = 0.5 * (pts[1] - pts[0]).cross(pts[2] - pts[0]);
        let longest = (0..3)
            .map(|i| pts[i].distance(pts[(i + 1) % 3]))
            .fold(0.0, f64::max);
        if area < 0.05 * longest * longest {
            continue;
        }
        tested += 1;
        let subdiv = subdivide_with(
            &single_triangle(pts),
            BoundarySplit::PerpendicularOrMidpoint,
        )
        .unwrap();
        let nodes = subdiv.local_nodes(0);
        for e in 0..3 {
            let side = &compute_bubble(&subdiv, e).unwrap().sides[0];
            let [a, b] = subdiv.mesh().edge_points(e);
            let d = b - a;
            let outward = if (a - subdiv.centroid(0)).dot(Vec2::new(d.y, -d.x)) > 0.0 {
                Vec2::new(d.y, -d.x)
            } else {
                Vec2::new(-d.y, d.x)
            };
            // divergence theorem: the flux leaves through the bubble's own edge only
            let target = 0.5 * subdiv.direction(e).dot(outward) / area;
            let scale = target.abs() + side.centroid_value.norm() * longest / area;
            worst = worst.max(subtriangle_deviation(nodes, side.node_values, target) / scale);
        }
    }
    outcome(
        reference_error < 1e-14 && reference_divergence < 1e-14 && worst < 1e-10,
        format!(
            "reference u_m = ({:.15}, {:.15}), oracle offset {reference_error:.1e}, divergence offset \
             {reference_divergence:.1e}; random triangles max scaled deviation {worst:.1e}",
            um.x, um.y
        ),
    )
}

fn coupling() -> Outcome {
    let tangential = |mu| {
        solve_coupling(Scenario::Tangential, mu, CI_NODES)
            .unwrap()
            .interface_oscillations()
    };
    let (small, large) = (tangential(1e-2), tangential(10.0));
    let normal: Vec<(f64, f64, f64)> = [1.0, 1e-2, 1e-3, 1e-6]
        .iter()
        .map(|&mu| {
            let r = solve_coupling(Scenario::Normal, mu, CI_NODES).unwrap();
            (mu, r.divergence_defect, r.net_outflow)
        })
        .collect();
    let conserved = normal.iter().all(|&(_, d, q)| d < 1e-9 && q.abs() < 1e-9);
    let worst = normal.iter().map(|&(_, d, _)| d).fold(0.0, f64::max);
    outcome(
        small >= 2 && large < 2 && conserved,
        format!(
            "tangential oscillations mu=1e-2: {small}, mu=10: {large}; normal scenario solved for 4 viscosities, \
             max divergence defect {worst:.1e}"
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, Check); 8] = [
        ("Stokes convergence", stokes_convergence),
        ("Darcy convergence and superconvergence", darcy_convergence),
        ("divergence exactness", divergence_exactness),
        ("locking-free elasticity", locking),
        ("lambda and mu robustness", robustness),
        ("Fortin commuting property", fortin_commuting),
        ("bubble oracle", bubble_oracle),
        ("Brinkman coupling", coupling),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        report(&format!(
            "{status} criterion {}: {name}: {}",
            k + 1,
            o.detail
        ));
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
