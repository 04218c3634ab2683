//! Verification suites. Each suite draws its random data from its own
//! generator seeded from the scenario seed, so suites give the same values
//! alone or inside `all`.

use std::error::Error;
use std::f64::consts::PI;

use casimir_lab::fieldexpr::Expr;
use casimir_lab::fluid::{
    coadjoint, euler_evolve, helicity, helicity_density_check, helicity_gradient, helicity_gradient_check,
    lie_poisson_bracket, loop_integral, pairing, subalgebra_orthogonality, FluidState,
};
use casimir_lab::foliation::{
    diffeo_direction, graph_leaf_loop, gv_casimir_suite, gv_finite_difference, rescaling, FoliatedState,
    FoliationError, GraphFoliation,
};
use casimir_lab::forms3::io::FieldRecord;
use casimir_lab::forms3::random::{random_divergence_free, random_form, random_scalar, random_vector_field};
use casimir_lab::forms3::{d, interior, transport, wedge, Form, Grid, Loop, ScalarField, VectorField};
use casimir_lab::rattleback::{
    bianchi_vi, casimir_gradient, casimir_gradient_check, integrate, monomial_gradients, poisson_bracket,
    restricted_casimir_report, Method, RattlebackState,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checks::Recorder;
use crate::fields::sample;

type Res<T> = Result<T, Box<dyn Error>>;

pub const GV_GAP_NOTE: &str = "godbillon-vey: every identity is exercised on foliations with GV = 0; \
no grid-representable integrable 1-form with a resolvable nonzero GV is included, so the nonzero case is untested";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Rattleback,
    LiePoisson,
    GodbillonVey,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Rattleback => "rattleback",
            Suite::LiePoisson => "lie-poisson",
            Suite::GodbillonVey => "godbillon-vey",
            Suite::All => "all",
        }
    }
}

/// Inputs shared by the suites.
#[derive(Debug, Clone)]
pub struct Params {
    pub grid: usize,
    pub foliation_grid: usize,
    pub dt: f64,
    pub seed: u64,
    pub h: f64,
    pub ic: [f64; 3],
    pub rk45_tol: f64,
    pub profile: Expr,
    pub scale: Expr,
    pub dump: bool,
}

pub fn run_suite(suite: Suite, p: &Params, rec: &mut Recorder, dumps: &mut Vec<FieldRecord>) -> Res<()> {
    match suite {
        Suite::Rattleback => rattleback(p, rec),
        Suite::LiePoisson => lie_poisson(p, rec, dumps)?,
        Suite::GodbillonVey => godbillon_vey(p, rec, dumps)?,
        Suite::All => {
            rattleback(p, rec);
            lie_poisson(p, rec, dumps)?;
            godbillon_vey(p, rec, dumps)?;
        }
    }
    Ok(())
}

fn rng(p: &Params, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(p.seed ^ salt)
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn rel(num: f64, scale: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / scale
    }
}

/// Conservation and singular-line checks for the rattleback at `p.h`.
pub fn rattleback(p: &Params, rec: &mut Recorder) {
    let h = p.h;
    let xi0 = RattlebackState::new(p.ic[0], p.ic[1], p.ic[2]);
    let drifts = |m: Method| -> Res<[f64; 2]> {
        let tr = integrate(xi0, h, p.dt, 100.0, m)?;
        let c = tr.max_casimir_drift().ok_or("trajectory left the chart r > 0")?;
        Ok([tr.max_energy_drift(), c])
    };
    rec.group(["rattleback.rk4_energy_drift", "rattleback.rk4_casimir_drift"], || drifts(Method::Rk4));
    rec.group(["rattleback.rk45_energy_drift", "rattleback.rk45_casimir_drift"], || {
        drifts(Method::Rk45 { tol: p.rk45_tol })
    });

    rec.group(["rattleback.structure_antisymmetry", "rattleback.jacobi"], || {
        let alg = bianchi_vi(h)?;
        Ok([alg.antisymmetry_residual(), alg.jacobi_residual()])
    });
    rec.check("rattleback.bracket_antisymmetry", || {
        let alg = bianchi_vi(h)?;
        let mut worst = 0.0f64;
        for xi in [xi0, RattlebackState::new(0.3, -1.2, 0.7), RattlebackState::new(-2.0, 0.5, 3.0)] {
            let grads = monomial_gradients(xi);
            for a in &grads {
                for b in &grads {
                    let sum = poisson_bracket(&alg, xi, *a, *b) + poisson_bracket(&alg, xi, *b, *a);
                    let scale = norm3(*a) * norm3(*b) * norm3(xi.to_array()) * (1.0 + h.abs());
                    worst = worst.max(rel(sum.abs(), scale));
                }
            }
        }
        Ok(worst)
    });
    rec.check("rattleback.casimir_kernel", || {
        let scale = norm3(casimir_gradient(xi0, h)?) * norm3(xi0.to_array()) * (1.0 + h.abs());
        Ok(rel(casimir_gradient_check(xi0, h)?, scale))
    });
    rec.check("rattleback.p_reflection", || {
        let a = integrate(xi0, h, p.dt, 10.0, Method::Rk4)?;
        let b = integrate(RattlebackState::new(-xi0.p, xi0.r, xi0.s), h, p.dt, 10.0, Method::Rk4)?;
        let worst = a.states.iter().zip(&b.states).fold(0.0f64, |m, (x, y)| {
            m.max((x.p + y.p).abs()).max((x.r - y.r).abs()).max((x.s - y.s).abs())
        });
        Ok(worst)
    });

    rec.group(
        [
            "rattleback.singular_rhs",
            "rattleback.singular_poisson",
            "rattleback.singular_bracket",
            "rattleback.singular_s_drift",
        ],
        || {
            let mut out = [0.0f64; 4];
            for s0 in [p.ic[2], 1.0, 0.0, -7.3] {
                let r = restricted_casimir_report(s0, h)?;
                out[0] = out[0].max(r.rhs_residual);
                out[1] = out[1].max(r.poisson_residual);
                out[2] = out[2].max(r.bracket_residual);
                let tr = integrate(RattlebackState::new(0.0, 0.0, s0), h, p.dt, 10.0, Method::Rk4)?;
                for st in &tr.states {
                    out[3] = out[3].max(st.p.abs()).max(st.r.abs()).max((st.s - s0).abs());
                }
            }
            Ok(out)
        },
    );
}

fn beltrami(g: Grid) -> Form {
    Form::one(
        ScalarField::from_fn(g, |_, _, z| (2.0 * PI * z).sin()),
        ScalarField::from_fn(g, |_, _, z| (2.0 * PI * z).cos()),
        ScalarField::zeros(g),
    )
}

/// `β = dz + a(z) dx`
fn graph_beta(a: &ScalarField) -> Form {
    let g = a.grid();
    Form::one(a.clone(), ScalarField::zeros(g), ScalarField::constant(g, 1.0))
}

/// Forms engine and fluid Lie-Poisson checks on the `p.grid` grid.
pub fn lie_poisson(p: &Params, rec: &mut Recorder, dumps: &mut Vec<FieldRecord>) -> Res<()> {
    let g = Grid::new(p.grid)?;
    let bw = (p.grid / 8).min(4);
    let mut rng = rng(p, 0x11);

    rec.check("forms.dd_residual", || {
        let mut worst = 0.0f64;
        for k in 0..200 {
            let f = random_form(g, k % 2, bw, 1.0, &mut rng);
            worst = worst.max(d(&d(&f)?)?.l2_norm());
        }
        Ok(worst)
    });
    rec.check("forms.contraction_identity", || {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let a = random_form(g, 1, bw, 1.0, &mut rng);
            let v = random_vector_field(g, bw, 1.0, &mut rng);
            let lhs = interior(&v, &a)?;
            let rhs = wedge(&a, &v.to_two_form())?;
            worst = worst.max((lhs.comp(0) - rhs.comp(0)).max_abs());
        }
        Ok(worst)
    });

    let bel = beltrami(g);
    rec.check("fluid.beltrami_helicity", || Ok((helicity(&bel)? - 2.0 * PI).abs()));
    rec.group(["fluid.exact_helicity", "fluid.gauge_helicity_shift"], || {
        let dg = d(&Form::scalar(random_scalar(g, bw, 1.0, &mut rng)))?;
        Ok([helicity(&dg)?.abs(), (helicity(&(&bel + &dg))? - helicity(&bel)?).abs()])
    });

    rec.group(["fluid.euler_energy_drift", "fluid.euler_helicity_drift"], || {
        let alpha = random_divergence_free(g, 2, 0.5, &mut rng).flat();
        let (out, diag) = euler_evolve(&FluidState::new(alpha)?, p.dt, 0.5)?;
        if p.dump {
            dumps.push(FieldRecord::Form(out.into_alpha()));
        }
        Ok([diag.energy_drift(), diag.helicity_drift()])
    });

    rec.group(
        [
            "fluid.helicity_gradient",
            "fluid.helicity_gradient_gauge",
            "fluid.gradient_divergence",
        ],
        || {
            let alpha = random_form(g, 1, 2, 1.0, &mut rng);
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let da = random_form(g, 1, 2, 1.0, &mut rng);
                worst = worst.max(helicity_gradient_check(&alpha, &da)?.relative());
            }
            let gauge = d(&Form::scalar(random_scalar(g, 2, 1.0, &mut rng)))?;
            let c = helicity_gradient_check(&alpha, &gauge)?;
            Ok([worst, c.lhs.abs().max(c.rhs.abs()), helicity_gradient(&alpha)?.divergence_residual()])
        },
    );
    rec.check("fluid.coadjoint_adjunction", || {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let alpha = random_form(g, 1, 2, 1.0, &mut rng);
            let u = random_divergence_free(g, 2, 1.0, &mut rng);
            let v = random_divergence_free(g, 2, 1.0, &mut rng);
            let lhs = pairing(&coadjoint(&u, &alpha)?, &v)?;
            let rhs = pairing(&alpha, &u.bracket(&v))?;
            worst = worst.max(rel((lhs - rhs).abs(), alpha.l2_norm() * u.l2_norm() * v.l2_norm()));
        }
        Ok(worst)
    });

    let a = sample("profile", &p.profile, g)?;
    let f = sample("scale", &p.scale, g)?;
    let beta = graph_beta(&a);
    let alpha = beta.times(&f);
    rec.check("fluid.orthogonality", || {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let h = random_scalar(g, bw, 1.0, &mut rng);
            let x = VectorField::from_two_form(&d(&beta.times(&h))?)?;
            let v = subalgebra_orthogonality(&alpha, &beta, &h)?;
            worst = worst.max(v.abs() / (alpha.l2_norm() * x.l2_norm()).max(1.0));
        }
        Ok(worst)
    });
    rec.group(["fluid.helicity_density", "fluid.vorticity_tangency"], || {
        let w = FluidState::new(alpha.clone())?.vorticity();
        Ok([helicity_density_check(&alpha)?, interior(&w, &alpha)?.max_abs()])
    });
    rec.check("fluid.leaf_loops", || {
        let profile = &p.profile;
        let mut worst = 0.0f64;
        for (x0, y0, z0) in [(0.3, 0.0, 0.6), (0.85, 0.5, 0.1)] {
            let straight = Loop::from_fn(64, |t| [x0, y0 + t, z0])?;
            worst = worst.max(loop_integral(&alpha, &straight)?.abs());
        }
        for (start, w) in [([0.1, 0.4, 0.2], 0.2), ([0.7, 0.0, 0.9], 0.3)] {
            let leaf = graph_leaf_loop(|z| profile.eval(0.0, 0.0, z), start, w, 256)?;
            worst = worst.max(loop_integral(&alpha, &leaf)?.abs());
        }
        Ok(worst)
    });
    Ok(())
}

struct Family {
    graph: GraphFoliation,
    base: FoliatedState,
}

fn first_error(e: &FoliationError) -> Box<dyn Error> {
    e.to_string().into()
}

/// Foliation chain, Godbillon-Vey and restricted-Casimir checks. Identity
/// checks use `p.foliation_grid`; transport uses `p.grid`.
pub fn godbillon_vey(p: &Params, rec: &mut Recorder, dumps: &mut Vec<FieldRecord>) -> Res<()> {
    let gf_grid = Grid::new(p.foliation_grid)?;
    let g = Grid::new(p.grid)?;
    let mut rng = rng(p, 0x22);
    rec.notes.push(GV_GAP_NOTE.to_string());
    rec.notes.push(
        "foliation.chi_gauge_shift compares against χ − 2(ĝ dα + d(ĝα)) with ĝ = g − f²/2 \
(equal to the g-only formula when f = 0)"
            .to_string(),
    );

    let a = sample("profile", &p.profile, gf_grid)?;
    let f = sample("scale", &p.scale, gf_grid)?;
    let families: Vec<Result<Family, FoliationError>> = [GraphFoliation::unscaled(a.clone()), GraphFoliation::new(a, f)]
        .into_iter()
        .map(|graph| FoliatedState::new(graph.alpha()).map(|base| Family { graph, base }))
        .collect();
    let fam = |i: usize| -> Res<&Family> { families[i].as_ref().map_err(first_error) };
    if p.dump {
        if let Ok(fm) = &families[0] {
            for form in [fm.base.alpha(), fm.base.eta(), fm.base.gamma(), fm.base.chi()] {
                dumps.push(FieldRecord::Form(form.clone()));
            }
        }
    }

    rec.group(
        [
            "foliation.integrability",
            "foliation.chain_eta",
            "foliation.chain_gamma",
            "foliation.chain_solvability",
            "foliation.chi_tangency",
            "foliation.chi_closure",
            "foliation.chi_gauge_shift",
            "foliation.gv_graph",
            "foliation.gv_spread",
        ],
        || {
            let graph = fam(0)?;
            let base = &graph.base;
            let mut states = vec![base.clone(), fam(1)?.base.clone()];
            for _ in 0..10 {
                let h = random_scalar(gf_grid, 2, 0.2, &mut rng).map(f64::exp);
                states.push(FoliatedState::new(base.alpha().times(&h))?);
            }
            let mut gauge = 0.0f64;
            for k in 0..10 {
                let f = if k < 5 {
                    ScalarField::zeros(gf_grid)
                } else {
                    random_scalar(gf_grid, 2, 0.3, &mut rng)
                };
                let gg = random_scalar(gf_grid, 2, 0.3, &mut rng);
                let shifted = base.gauge_shift(&f, &gg)?;
                gauge = gauge.max(shifted.chi_shift_residual);
                states.push(shifted.state);
            }
            let mut worst = [0.0f64; 6];
            let mut gvs = Vec::new();
            for st in &states {
                let r = st.residuals();
                for (w, v) in worst
                    .iter_mut()
                    .zip([r.integrability, r.eta, r.gamma, r.solvability, r.chi_tangency, r.chi_closure])
                {
                    *w = w.max(v);
                }
                gvs.push(st.godbillon_vey()?);
            }
            let gv0 = gvs[0];
            let spread = gvs.iter().cloned().fold(f64::MIN, f64::max) - gvs.iter().cloned().fold(f64::MAX, f64::min);
            Ok([
                worst[0],
                worst[1],
                worst[2],
                worst[3],
                worst[4],
                worst[5],
                gauge,
                gv0.abs(),
                spread / (1.0 + gv0.abs()),
            ])
        },
    );

    rec.group(
        [
            "foliation.variation_profile",
            "foliation.variation_rescaling",
            "foliation.variation_diffeo",
        ],
        || {
            let mut worst = [0.0f64; 3];
            for i in 0..2 {
                let fm = fam(i)?;
                let st = &fm.base;
                let tol = *st.tolerances();
                let alpha = st.alpha().clone();
                let scale_of = |dir: &Form| (dir.l2_norm() * st.chi().l2_norm()).max(1.0);

                let b = ScalarField::from_fn(gf_grid, |_, _, z| 0.2 * (2.0 * PI * z).cos());
                let dir = fm.graph.deformation(&b);
                let fd = gv_finite_difference(|t| Ok(&alpha + &dir.scale(t)), 1e-3, tol)?;
                worst[0] = worst[0].max((fd - st.gv_variation(&dir)?).abs() / scale_of(&dir));

                let h = ScalarField::from_fn(gf_grid, |x, _, z| 0.3 * (2.0 * PI * (x - z)).sin());
                let dir = rescaling(&alpha, &h);
                let fd = gv_finite_difference(|t| Ok(alpha.times(&h.scale(t).map(f64::exp))), 1e-3, tol)?;
                worst[1] = worst[1].max((fd - st.gv_variation(&dir)?).abs() / scale_of(&dir));

                let u = random_vector_field(gf_grid, 2, 0.25, &mut rng);
                let dir = diffeo_direction(&alpha, &u)?;
                let fd = gv_finite_difference(
                    |t| {
                        if t >= 0.0 {
                            Ok(transport(&alpha, &u, t, 1e-4)?)
                        } else {
                            Ok(transport(&alpha, &u.scale(-1.0), -t, 1e-4)?)
                        }
                    },
                    1e-3,
                    tol,
                )?;
                worst[2] = worst[2].max((fd - st.gv_variation(&dir)?).abs() / scale_of(&dir));
            }
            Ok(worst)
        },
    );
    rec.check("foliation.tangency_gate", || {
        let st = &fam(0)?.base;
        let bad = Form::one(
            ScalarField::zeros(gf_grid),
            ScalarField::from_fn(gf_grid, |x, _, _| (2.0 * PI * x).sin()),
            ScalarField::zeros(gf_grid),
        );
        Ok(match st.gv_variation(&bad) {
            Err(FoliationError::Precondition(_)) => 0.0,
            _ => 1.0,
        })
    });

    let mut transport_note = None;
    rec.check("foliation.transport_gv_drift", || {
        let a = sample("profile", &p.profile, g)?;
        let st = FoliatedState::new(GraphFoliation::unscaled(a).alpha())?;
        // bandwidth 1 keeps the transported form inside the n = 32 dealiasing budget
        let mut fields: Vec<VectorField> = (0..3).map(|_| random_divergence_free(g, 1, 0.1, &mut rng)).collect();
        fields.extend((0..2).map(|_| random_vector_field(g, 1, 0.1, &mut rng)));
        let entries = gv_casimir_suite(&st, &fields, 0.2, p.dt)?;
        let degraded = entries.iter().filter(|e| e.degraded).count();
        if degraded > 0 {
            let worst = entries.iter().fold(0.0f64, |m, e| m.max(e.residuals.max_chain()));
            transport_note = Some(format!(
                "foliation.transport_gv_drift: {degraded} of {} transported states exceed the chain tolerances \
(largest chain residual {worst:.1e}); reported as degraded",
                entries.len()
            ));
        }
        Ok(entries.iter().fold(0.0f64, |m, e| m.max(e.drift / (1.0 + e.gv_initial.abs()))))
    });
    rec.notes.extend(transport_note);

    rec.group(
        [
            "foliation.degeneracy_pairing",
            "foliation.degeneracy_bracket",
            "foliation.xi_conditions",
        ],
        || {
            let mut worst = [0.0f64; 3];
            for i in 0..2 {
                let fm = fam(i)?;
                let st = &fm.base;
                for k in 0..3 {
                    let xi = st.xi_generator(&random_scalar(gf_grid, 2, 0.5, &mut rng))?;
                    worst[2] = worst[2].max(xi.tangency).max(xi.condon);
                    let dirs = [
                        fm.graph.deformation(&ScalarField::from_fn(gf_grid, |_, _, z| {
                            (2.0 * PI * (k as f64 + 1.0) * z).sin()
                        })),
                        rescaling(st.alpha(), &random_scalar(gf_grid, 2, 0.3, &mut rng)),
                        diffeo_direction(st.alpha(), &random_vector_field(gf_grid, 2, 0.3, &mut rng))?,
                    ];
                    for dir in &dirs {
                        let v = pairing(dir, &xi.v)?;
                        worst[0] = worst[0].max(rel(v.abs(), dir.l2_norm() * xi.v.l2_norm()));
                    }
                    let v = random_vector_field(gf_grid, 2, 1.0, &mut rng);
                    worst[1] = worst[1].max(st.bracket_degeneracy_check(&xi.v, &v)?.relative());
                }
            }
            Ok(worst)
        },
    );
    rec.check("foliation.restricted_bracket_dual", || {
        let st = &fam(1)?.base;
        let u = random_divergence_free(gf_grid, 3, 1.0, &mut rng);
        let v = random_divergence_free(gf_grid, 3, 1.0, &mut rng);
        let direct = st.restricted_bracket(&u, &v)?;
        let dual = lie_poisson_bracket(st.alpha(), &u, &v)?;
        Ok((direct - dual).abs() / (1.0 + direct.abs()))
    });
    Ok(())
}
