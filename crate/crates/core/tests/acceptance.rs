//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with the measured value and its pinned tolerance (run with
//! `--nocapture` to see them).

use std::collections::{BTreeMap, VecDeque};
use std::process::Command;
use std::time::Instant;

use glap::config::Config;
use glap::global::{optimize_global_with, parameter_grid, select_best, GlobalSearchConfig, Normalization};
use glap::imaging::{ColorImage, Interpolation, LabelMap};
use glap::measures::{arc_bending, bending_score, stretching_score, Arc, ProxyMeasures};
use glap::mesh::{
    build_meshes, foreground_params, mesh_dims, optimize_mesh, EnergyProblem, EnergyWeights, MeshPair,
    OptimizeOptions, SmoothnessForm, Term,
};
use glap::pceval::{
    bradley_terry_scores, count_circular_triads, preference_probabilities, read_probabilities, transitivity_rate,
    Outcome, PreferenceMatrix, PreferenceRecord, OUTLIER_THRESHOLD,
};
use glap::pipeline::render_scene;
use glap::projections::{
    gpp_forward, pannini_backward, pannini_forward, rectilinear_forward, stereographic_forward, viewport_plane_extent,
    PanniniParams, Projection, SpherePoint, ViewportSpec,
};
use glap::segmentation::{connected_components, render_seg_viewport};
use glap::synthetic::{corner_object_scene, objects_scene, Scene};
use glap::warp::{upsample_mesh, warp_image, warped_area_deviation, DenseField};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn verdict(criterion: &str, ok: bool, detail: String) {
    println!("{} {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{criterion}: {detail}");
}

/// 50 x 50 sphere grid with |phi| <= 80 deg, |theta| <= 60 deg.
fn sphere_grid() -> Vec<SpherePoint> {
    let lin = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / 49.0;
    (0..50)
        .flat_map(|i| (0..50).map(move |j| SpherePoint::from_degrees(lin(-80.0, 80.0, i), lin(-60.0, 60.0, j))))
        .collect()
}

fn spec(w: usize, h: usize) -> ViewportSpec {
    ViewportSpec::new(SpherePoint::new(0.0, 0.0), 150f64.to_radians(), w, h).unwrap()
}

fn pannini(d: f64, vc: f64) -> Projection {
    Projection::Pannini(PanniniParams::new(d, vc).unwrap())
}

fn scenes() -> Vec<(&'static str, Scene)> {
    vec![
        ("corner object", corner_object_scene()),
        ("center object", objects_scene(&[(0.0, 0.0)], 15.0)),
        ("two side objects", objects_scene(&[(-50.0, 5.0), (55.0, -10.0)], 12.0)),
        ("high object", objects_scene(&[(20.0, 35.0)], 14.0)),
        ("lines only", objects_scene(&[], 10.0)),
    ]
}

#[test]
fn a01_projection_round_trip() {
    let start = Instant::now();
    let points = sphere_grid();
    let mut params: Vec<PanniniParams> = parameter_grid();
    for d in [0.0, 1.1, 1.2] {
        params.extend((0..=10).map(|j| PanniniParams::new(d, j as f64 / 10.0).unwrap()));
    }
    let mut worst: f64 = 0.0;
    for &p in &params {
        for &s in &points {
            let back = pannini_backward(pannini_forward(s, p).unwrap(), p).unwrap();
            worst = worst.max((back.phi - s.phi).abs()).max((back.theta - s.theta).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "1 projection round trip",
        worst < 1e-9 && secs < 5.0,
        format!("{} parameter sets, max error {worst:.2e} rad (< 1e-9), {secs:.2} s (< 5 s)", params.len()),
    );
}

#[test]
fn a02_specialization_identities() {
    let mut worst: f64 = 0.0;
    let p00 = PanniniParams::new(0.0, 0.0).unwrap();
    for s in sphere_grid() {
        let rect = rectilinear_forward(s).unwrap();
        let stereo = stereographic_forward(s).unwrap();
        for (a, b) in [
            (pannini_forward(s, p00).unwrap(), rect),
            (gpp_forward(s, 0.0).unwrap(), rect),
            (gpp_forward(s, 1.0).unwrap(), stereo),
        ] {
            worst = worst.max((a.x - b.x).abs()).max((a.y - b.y).abs());
        }
    }
    verdict(
        "2 specialization identities",
        worst < 1e-12,
        format!("max plane difference {worst:.2e} (< 1e-12)"),
    );
}

#[test]
fn a03_vertical_lines_stay_vertical() {
    let mut worst: f64 = 0.0;
    for &p in &parameter_grid() {
        for i in 0..20 {
            let phi = (-76.0 + 8.0 * i as f64).to_radians();
            let xs: Vec<f64> = (0..=120)
                .map(|k| pannini_forward(SpherePoint::new(phi, (k as f64 - 60.0).to_radians()), p).unwrap().x)
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
            worst = worst.max(var);
        }
    }
    verdict(
        "3 vertical-line preservation",
        worst < 1e-18,
        format!("max variance of x along a meridian {worst:.2e} (< 1e-18)"),
    );
}

#[test]
fn a04_viewport_extent_consistency() {
    let ar = 16.0 / 9.0;
    let mut worst_rel: f64 = 0.0;
    for p in parameter_grid() {
        for fh in [60.0f64, 120.0, 150.0, 170.0] {
            let e = viewport_plane_extent(p, fh.to_radians(), ar).unwrap();
            worst_rel = worst_rel.max((e.half_height * ar - e.half_width).abs() / e.half_width);
        }
    }
    let e = viewport_plane_extent(PanniniParams::new(0.5, 0.0).unwrap(), 150f64.to_radians(), ar).unwrap();
    // hand evaluation: on the central column phi = 0, S = 1 and y = tan(theta)
    let (s, c) = 75f64.to_radians().sin_cos();
    let hw = 1.5 * s / (0.5 + c);
    let fv_hand = 2.0 * (hw / ar).atan().to_degrees();
    let fv = e.f_v.to_degrees();
    let listed = 93.98;
    let ok = worst_rel <= 2.0 * f64::EPSILON && (fv - fv_hand).abs() < 1e-9 && (fv - 94.0889).abs() < 0.02;
    verdict(
        "4 viewport extent consistency",
        ok,
        format!(
            "max |hh*AR - hw|/hw {worst_rel:.1e}; f_v = {fv:.4} deg, hand value {fv_hand:.4} (target 94.0889 +- 0.02; \
             the listed {listed} is {:.3} deg off the hand evaluation)",
            fv_hand - listed
        ),
    );
}

/// Mesh pair for a 19 x 11 lattice with random object labels.
fn random_problem(rng: &mut StdRng, weights: EnergyWeights, smoothness: SmoothnessForm) -> (EnergyProblem, Vec<[f64; 2]>) {
    let d_b = rng.gen_range(1..=10) as f64 / 10.0;
    let vc_b = rng.gen_range(0..=10) as f64 / 10.0;
    let params_b = PanniniParams::new(d_b, vc_b).unwrap();
    let params_f = foreground_params(params_b, 0.2, 0.0).unwrap();
    let sp = spec(190, 110);
    let pair = build_meshes(params_b, params_f, &sp, 19, 11).unwrap();
    let (cx, cy, r) = (rng.gen_range(0..190), rng.gen_range(0..110), rng.gen_range(10..60) as i64);
    let seg = LabelMap::from_fn(190, 110, |x, y| {
        let (dx, dy) = (x as i64 - cx as i64, y as i64 - cy as i64);
        u32::from(dx * dx + dy * dy < r * r)
    });
    let problem = EnergyProblem::new(&pair, &seg, weights, smoothness);
    let v = pair
        .m_b
        .vertices()
        .iter()
        .map(|b| [b[0] + rng.gen_range(-0.8..0.8), b[1] + rng.gen_range(-0.8..0.8)])
        .collect();
    (problem, v)
}

fn fd_relative_error(problem: &EnergyProblem, v: &[[f64; 2]], f: &dyn Fn(&EnergyProblem, &[[f64; 2]], Option<&mut [[f64; 2]]>) -> f64) -> f64 {
    let h = 1e-5;
    let mut analytic = vec![[0.0; 2]; v.len()];
    f(problem, v, Some(&mut analytic));
    let mut w = v.to_vec();
    let (mut num, mut den): (f64, f64) = (0.0, 0.0);
    for k in 0..v.len() {
        for c in 0..2 {
            w[k][c] = v[k][c] + h;
            let plus = f(problem, &w, None);
            w[k][c] = v[k][c] - h;
            let minus = f(problem, &w, None);
            w[k][c] = v[k][c];
            let fd = (plus - minus) / (2.0 * h);
            num += (analytic[k][c] - fd).powi(2);
            den = den.max(analytic[k][c].abs()).max(fd.abs());
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num.sqrt() / den / (v.len() as f64 * 2.0).sqrt()
    }
}

#[test]
fn a05_energy_gradients_match_finite_differences() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for trial in 0..100 {
        let smoothness = if trial % 2 == 0 { SmoothnessForm::Relative } else { SmoothnessForm::Absolute };
        let weights = EnergyWeights {
            lambda_c: rng.gen_range(0.0..2.0),
            lambda_b: rng.gen_range(0.0..2.0),
            lambda_s: rng.gen_range(0.0..2.0),
            lambda_a: rng.gen_range(0.0..4.0),
        };
        let (problem, v) = random_problem(&mut rng, weights, smoothness);
        for (name, term) in [
            ("E_c", Term::Conformality),
            ("E_ld", Term::Line),
            ("E_s", Term::Smoothness),
            ("E_a", Term::Asymmetric),
        ] {
            let e = fd_relative_error(&problem, &v, &|p, v, g| p.term(term, v, g, 1.0));
            let w = worst.entry(name).or_default();
            *w = w.max(e);
        }
        let e = fd_relative_error(&problem, &v, &|p, v, g| p.evaluate(v, g).total);
        let w = worst.entry("E_t").or_default();
        *w = w.max(e);
    }
    let secs = start.elapsed().as_secs_f64();
    let max = worst.values().cloned().fold(0.0, f64::max);
    let per_term: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    verdict(
        "5 gradient correctness",
        max < 1e-5 && secs < 30.0,
        format!("100 random 19x11 meshes, max relative error {} (< 1e-5), {secs:.1} s (< 30 s)", per_term.join(", ")),
    );
}

/// VP_b object map and mesh pair of a scene at `w x h`, as the pipeline
/// builds them.
fn scene_problem(scene: &Scene, w: usize, h: usize) -> (MeshPair, LabelMap) {
    let (eri, classes) = scene.render(1024, 512);
    let config = Config {
        width: w,
        height: h,
        ..Config::default()
    };
    let out = render_scene(&config, &eri, Some(&classes)).unwrap();
    (out.meshes.unwrap(), out.seg_vp.unwrap())
}

#[test]
fn a06_energy_fixed_points_and_descent() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, scene) in scenes() {
        let (pair, seg_vp) = scene_problem(&scene, 320, 180);
        let problem = EnergyProblem::new(&pair, &seg_vp, EnergyWeights::default(), SmoothnessForm::Relative);
        let e_c = problem.term(Term::Conformality, pair.m_f.vertices(), None, 1.0);
        let e_ld = problem.term(Term::Line, pair.m_b.vertices(), None, 1.0);
        let e_a = problem.term(Term::Asymmetric, pair.m_b.vertices(), None, 1.0);
        let opt = optimize_mesh(&pair, &seg_vp, EnergyWeights::default(), &OptimizeOptions::default()).unwrap();
        let rising = opt.trace.windows(2).filter(|w| w[1].terms.total > w[0].terms.total).count();
        let recheck = problem.evaluate(opt.mesh.vertices(), None).total;
        ok &= e_c == 0.0 && e_ld == 0.0 && e_a == 0.0;
        ok &= opt.final_energy() <= opt.initial_energy() && (recheck - opt.final_energy()).abs() <= 1e-9 * recheck.max(1.0);
        lines.push(format!(
            "{name}: E_c(M_f) {e_c}, E_ld(M_b) {e_ld}, E_a(M_b) {e_a}, E_t {:.4} -> {:.4} ({rising} rising steps)",
            opt.initial_energy(),
            opt.final_energy()
        ));
    }
    verdict("6 energy fixed points and descent", ok, lines.join("; "));
}

#[test]
fn a07_global_search_matches_brute_force() {
    let sp = spec(640, 360);
    let config = GlobalSearchConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, scene) in scenes() {
        let (_, classes) = scene.render(1024, 512);
        let seg = connected_components(&classes);
        let result = optimize_global_with(&seg, &sp, &config, &ProxyMeasures::default()).unwrap();

        // independent pass: own grid, own cost, own argmin
        let small = sp.downscaled(config.measure_downscale);
        let mut best: Option<(f64, f64, f64)> = None;
        for i in 1..=10 {
            for j in 0..=10 {
                let (d, vc) = (i as f64 * 0.1, j as f64 * 0.1);
                let proj = pannini(d, vc);
                let seg_vp = render_seg_viewport(&seg, &small, &proj).unwrap();
                let cost = config.beta * stretching_score(&seg_vp, &small, &proj).unwrap() + bending_score(&small, &proj).unwrap();
                // ties go to the smaller vc, then the smaller d
                let better = match best {
                    None => true,
                    Some((c, bd, bvc)) => cost < c || (cost == c && (vc < bvc || (vc == bvc && d < bd))),
                };
                if better {
                    best = Some((cost, d, vc));
                }
            }
        }
        let (cost, d, vc) = best.unwrap();
        let same = (result.best.d - d).abs() < 1e-12 && (result.best.vc - vc).abs() < 1e-12;

        // scaling the objective must not move the argmin
        let mut scaled_same = true;
        for k in [1e-3, 0.5, 42.0] {
            let mut surface = result.cost_surface.clone();
            for p in surface.iter_mut() {
                p.stretching *= k;
                p.bending *= k;
            }
            for norm in [Normalization::Absolute, Normalization::GridMinMax] {
                let mut reference = result.cost_surface.clone();
                let want = select_best(&mut reference, config.beta, norm);
                scaled_same &= select_best(&mut surface, config.beta, norm) == want;
            }
        }
        ok &= same && scaled_same;
        lines.push(format!(
            "{name}: search ({}, {}) brute force ({d:.1}, {vc:.1}) cost {cost:.5}, scale invariant {scaled_same}",
            result.best.d, result.best.vc
        ));
    }
    verdict("7 global optimizer oracle", ok, lines.join("; "));
}

#[test]
fn a08_bending_proxy_sanity() {
    let sp = spec(640, 360);
    let rect = bending_score(&ViewportSpec::new(SpherePoint::new(0.0, 0.0), 120f64.to_radians(), 640, 360).unwrap(), &Projection::Rectilinear).unwrap();
    let arc = |vc: f64| {
        let proj = pannini(1.0, vc);
        let extent = proj.plane_extent(sp.f_h, sp.aspect_ratio()).unwrap();
        [30.0f64, -30.0]
            .iter()
            .map(|t| arc_bending(&Arc::Horizontal { theta: t.to_radians() }, &proj, &extent, 2001).unwrap())
            .fold(0.0, f64::max)
    };
    let (b0, b1) = (arc(0.0), arc(1.0));
    verdict(
        "8 bending proxy sanity",
        rect < 1e-6 && b0 > b1,
        format!("rectilinear {rect:.1e} (< 1e-6); 30 deg arcs at d=1: vc=0 {b0:.4} > vc=1 {b1:.4}"),
    );
}

#[test]
fn a09_defaults_in_the_run_manifest() {
    let dir = tempfile::TempDir::new().unwrap();
    let (eri, classes) = corner_object_scene().render(1024, 512);
    let eri_path = dir.path().join("eri.png");
    let labels_path = dir.path().join("labels.png");
    glap::imaging::io::write_color(&eri_path, &eri).unwrap();
    glap::imaging::io::write_labels(&labels_path, &classes).unwrap();
    let out = dir.path().join("run");
    let status = Command::new(env!("CARGO_BIN_EXE_glap"))
        .args(["render", "--eri"])
        .arg(&eri_path)
        .arg("--labels")
        .arg(&labels_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("manifest.cfg")).unwrap();
    let m: BTreeMap<&str, &str> = text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim(), v.trim()))
        .collect();
    let num = |k: &str| m[k].parse::<f64>().unwrap();
    let checks = [
        ("beta", num("beta") == 0.17),
        ("lambda_c", num("lambda_c") == 0.3),
        ("lambda_b", num("lambda_b") == 1.5),
        ("lambda_s", num("lambda_s") == 0.5),
        ("lambda_a", num("lambda_a") == 3.0),
        ("d_f = d_b + 0.2", (num("result.d_f") - num("result.d_b") - 0.2).abs() < 1e-12),
        ("vc_f", num("result.vc_f") == 0.0),
        ("iterations", num("iterations") == 100.0),
        ("learning_rate", num("learning_rate") == 0.02),
        ("viewport", num("width") == 1816.0 && num("height") == 1020.0),
        ("mesh", num("result.mesh_w") == 181.0 && num("result.mesh_h") == 102.0),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    assert_eq!(mesh_dims(1816, 1020, 10), (181, 102));
    verdict(
        "9 defaults in the run manifest",
        failed.is_empty(),
        format!(
            "beta {}, lambda ({}, {}, {}, {}), d_b {} d_f {} vc_f {}, {} iterations, lr {}, mesh {}x{}; failed {failed:?}",
            m["beta"],
            m["lambda_c"],
            m["lambda_b"],
            m["lambda_s"],
            m["lambda_a"],
            m["result.d_b"],
            m["result.d_f"],
            m["result.vc_f"],
            m["iterations"],
            m["learning_rate"],
            m["result.mesh_w"],
            m["result.mesh_h"]
        ),
    );
}

#[test]
fn a10_conformality_ablation() {
    let (w, h) = (1816, 1020);
    let (eri, classes) = corner_object_scene().render(2048, 1024);
    let config = Config {
        width: w,
        height: h,
        ..Config::default()
    };
    let out = render_scene(&config, &eri, Some(&classes)).unwrap();
    let sp = config.viewport().unwrap();
    let pair = out.meshes.as_ref().unwrap();
    let seg_vp = out.seg_vp.as_ref().unwrap();
    let proj = Projection::Pannini(pair.params_b);
    let base = warped_area_deviation(&DenseField::identity(w, h), seg_vp, &sp, &proj).unwrap().unwrap();
    let deviation = |lambda_c: f64| {
        let weights = EnergyWeights {
            lambda_c,
            ..config.weights()
        };
        let opt = optimize_mesh(pair, seg_vp, weights, &config.optimize_options()).unwrap();
        warped_area_deviation(&upsample_mesh(&opt.mesh, w, h), seg_vp, &sp, &proj).unwrap().unwrap()
    };
    let off = deviation(0.0) / base - 1.0;
    let tuned = deviation(config.lambda_c) / base - 1.0;
    verdict(
        "10 conformality ablation",
        off.abs() <= 0.01 && tuned <= -0.20,
        format!(
            "VP_b deviation {base:.4}; lambda_c = 0: {:+.2}% (within 1%); default: {:+.2}% (<= -20%)",
            100.0 * off,
            100.0 * tuned
        ),
    );
}

/// Breadth-first flood fill with horizontal wrap; returns a component index
/// per pixel (usize::MAX for background).
fn flood_fill(classes: &LabelMap) -> Vec<usize> {
    let (w, h) = (classes.width(), classes.height());
    let mut comp = vec![usize::MAX; w * h];
    let mut next = 0;
    for start in 0..w * h {
        let class = classes.pixels()[start];
        if class == 0 || comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (x, y) = (k % w, k / w);
            let mut neighbours = vec![y * w + (x + 1) % w, y * w + (x + w - 1) % w];
            if y > 0 {
                neighbours.push(k - w);
            }
            if y + 1 < h {
                neighbours.push(k + w);
            }
            for n in neighbours {
                if classes.pixels()[n] == class && comp[n] == usize::MAX {
                    comp[n] = next;
                    queue.push_back(n);
                }
            }
        }
        next += 1;
    }
    comp
}

#[test]
fn a11_components_match_flood_fill() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut mismatches = 0;
    let mut seam_cases = 0;
    for trial in 0..200 {
        let classes_n = 1 + trial % 4;
        let density = rng.gen_range(0.2..0.9);
        let labels = LabelMap::from_fn(64, 64, |_, _| {
            if rng.gen_bool(density) {
                rng.gen_range(1..=classes_n as u32)
            } else {
                0
            }
        });
        if (0..64).any(|y| labels.get(0, y) != 0 && labels.get(0, y) == labels.get(63, y)) {
            seam_cases += 1;
        }
        let seg = connected_components(&labels);
        let oracle = flood_fill(&labels);
        // partitions are equal iff the id mapping is a bijection
        let mut fwd: BTreeMap<u32, usize> = BTreeMap::new();
        let mut back: BTreeMap<usize, u32> = BTreeMap::new();
        let mut ok = true;
        for (&id, &c) in seg.objects.pixels().iter().zip(&oracle) {
            if (id == 0) != (c == usize::MAX) {
                ok = false;
                continue;
            }
            if id == 0 {
                continue;
            }
            ok &= *fwd.entry(id).or_insert(c) == c && *back.entry(c).or_insert(id) == id;
        }
        ok &= seg.object_count() == fwd.len();
        if !ok {
            mismatches += 1;
        }
    }
    verdict(
        "11 CCA oracle",
        mismatches == 0 && seam_cases > 0,
        format!("200 random 64x64 rasters ({seam_cases} with seam-crossing runs), {mismatches} partition mismatches"),
    );
}

#[test]
fn a12_pairwise_comparison_analytics() {
    // 3-cycle observer
    let cycle = [
        PreferenceRecord::new("o", "i", "A", "B", Outcome::A),
        PreferenceRecord::new("o", "i", "B", "C", Outcome::A),
        PreferenceRecord::new("o", "i", "C", "A", Outcome::A),
    ];
    let t = transitivity_rate(&cycle).unwrap();
    let cycle_ok = (t.rate - 2.0 / 3.0).abs() < 1e-12 && t.outlier && t.rate < OUTLIER_THRESHOLD;

    // triad counts against Kendall's score formula on random tournaments
    let mut rng = StdRng::seed_from_u64(12);
    let mut triad_mismatch = 0;
    for _ in 0..500 {
        let n = rng.gen_range(3..=8);
        let mut beats = vec![false; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let a = rng.gen_bool(0.5);
                beats[i * n + j] = a;
                beats[j * n + i] = !a;
            }
        }
        let scores: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| beats[i * n + j]).count()).collect();
        let kendall = n * (n - 1) * (n - 2) / 6 - scores.iter().map(|s| s * s.saturating_sub(1) / 2).sum::<usize>();
        if count_circular_triads(n, &beats) != kendall {
            triad_mismatch += 1;
        }
    }

    // BT recovers the generating strengths from exact expected counts
    let truth = [1.0, 2.0, 4.0];
    let trials = 60.0;
    let mut wins = vec![0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                wins[i * 3 + j] = trials * truth[i] / (truth[i] + truth[j]);
            }
        }
    }
    let names: Vec<String> = ["s1", "s2", "s4"].iter().map(|s| s.to_string()).collect();
    let bt = bradley_terry_scores(&PreferenceMatrix::from_wins(names, wins, 60)).unwrap();
    let bt_err = (0..3)
        .map(|k| (bt.strengths[k] / bt.strengths[0] - truth[k]).abs())
        .fold(0.0, f64::max);

    // complementary probabilities on random votes with ties
    let stimuli = ["a", "b", "c", "d", "e"];
    let mut records = Vec::new();
    for o in 0..7 {
        for i in 0..5 {
            for j in i + 1..5 {
                let outcome = [Outcome::A, Outcome::B, Outcome::Tie][rng.gen_range(0..3)];
                records.push(PreferenceRecord::new(&format!("o{o}"), "i", stimuli[i], stimuli[j], outcome));
            }
        }
    }
    let p = preference_probabilities(&PreferenceMatrix::from_records(&records));
    let mut sum_err: f64 = 0.0;
    for i in 0..5 {
        for j in i + 1..5 {
            sum_err = sum_err.max((p.get(i, j).unwrap() + p.get(j, i).unwrap() - 1.0).abs());
        }
    }

    let table = read_probabilities(
        std::fs::File::open(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/table2_preferences.csv")).unwrap(),
    )
    .unwrap();
    let glap_gap = table["G1"].by_name("GLAP", "GAP");

    verdict(
        "12 PC analytics",
        cycle_ok && triad_mismatch == 0 && bt_err < 1e-6 && sum_err < 1e-12 && glap_gap == Some(0.72),
        format!(
            "3-cycle R_o = {:.6} outlier {}; {triad_mismatch}/500 triad mismatches; BT ratios {:?} (err {bt_err:.1e} < 1e-6, {} iterations); \
             max |P_AB + P_BA - 1| {sum_err:.1e}; parsed GLAP-vs-GAP {glap_gap:?}",
            t.rate,
            t.outlier,
            bt.strengths.iter().map(|s| s / bt.strengths[0]).collect::<Vec<_>>(),
            bt.iterations
        ),
    );
}

#[test]
fn a13_warp_identities_and_pipeline_runtime() {
    let mut rng = StdRng::seed_from_u64(13);
    let img = ColorImage::from_fn(97, 61, |_, _| [rng.gen(), rng.gen(), rng.gen()]);
    let identity = warp_image(&img, &DenseField::identity(97, 61), Interpolation::Bilinear).unwrap() == img;
    let (dx, dy) = (5i64, -3i64);
    let field = DenseField::from_fn(97, 61, |x, y| [(x as i64 + dx) as f64, (y as i64 + dy) as f64]);
    let shifted = warp_image(&img, &field, Interpolation::Bilinear).unwrap();
    let expected = ColorImage::from_fn(97, 61, |x, y| {
        img.get((x as i64 + dx).clamp(0, 96) as usize, (y as i64 + dy).clamp(0, 60) as usize)
    });
    let shift_ok = shifted == expected;

    let (eri, classes) = corner_object_scene().render(2048, 1024);
    let config = Config {
        width: 908,
        height: 510,
        ..Config::default()
    };
    let start = Instant::now();
    let out = render_scene(&config, &eri, Some(&classes)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let complete = out.optimization.is_some() && (out.viewport.width(), out.viewport.height()) == (908, 510);
    verdict(
        "13 warp identities and runtime",
        identity && shift_ok && complete && secs < 60.0,
        format!("identity bit-identical {identity}; integer shift with replicated border {shift_ok}; 908x510 GLAP run {secs:.1} s (< 60 s)"),
    );
}
