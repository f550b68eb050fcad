//! Drives the lowering passes in sequence and composes their witness maps.
//!
//! The caller names a target stage and, for the interval stages, the final
//! slack delta; the intermediate deltas are derived backwards from it. Each
//! inversion of delta ratio is exact: the squaring-to-inversion step divides
//! by 1800, the shifting-to-squaring step by 10, and the small-solution
//! delta is the largest power of two at most a fifth of the shifting delta.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::formula::{Fragment, Instance};
use crate::rational::{pow2_floor, rat, rat_int, Rat};
use crate::witness::{compose, WitnessMap};

use super::ami::to_ami;
use super::compact::compactify;
use super::conj::to_conj;
use super::inv::to_inv;
use super::shift::to_shift;
use super::small::to_small;
use super::square::to_square;
use super::{PassReport, TowerMode};

#[derive(Debug)]
pub struct PipelineOutput {
    pub instance: Instance,
    /// End-to-end witness map, original variables to target variables.
    pub witness: WitnessMap,
    pub reports: Vec<PassReport>,
}

fn stage_index(f: Fragment) -> usize {
    match f {
        Fragment::Etr => 0,
        Fragment::Conj => 1,
        Fragment::Compact => 2,
        Fragment::Ami => 3,
        Fragment::Small => 4,
        Fragment::Shift => 5,
        Fragment::Square => 6,
        Fragment::Inv => 7,
    }
}

/// The delta each stage must carry so that the target stage ends up with
/// `target_delta`.
#[derive(Debug, Clone)]
pub struct DeltaPlan {
    pub small: Rat,
    pub shift: Option<Rat>,
    pub square: Option<Rat>,
    pub inv: Option<Rat>,
}

pub fn plan_deltas(target: Fragment, target_delta: &Rat) -> Result<DeltaPlan> {
    if !target_delta.is_positive() {
        return Err(Error::Param("delta must be positive".into()));
    }
    let mut inv = None;
    let mut square = None;
    let mut shift = None;
    let mut d = target_delta.clone();
    if target == Fragment::Inv {
        if d >= rat(1, 6) {
            return Err(Error::Param("inversion delta must be below 1/6".into()));
        }
        inv = Some(d.clone());
        d /= rat_int(1800);
    }
    if stage_index(target) >= stage_index(Fragment::Square) {
        square = Some(d.clone());
        d /= rat_int(10);
    }
    if stage_index(target) >= stage_index(Fragment::Shift) {
        shift = Some(d.clone());
        d = pow2_floor(&(&d / rat_int(5)))
            .ok_or_else(|| Error::Param("derived small delta is not in (0, 1]".into()))?;
    }
    Ok(DeltaPlan {
        small: d,
        shift,
        square,
        inv,
    })
}

/// Lowers `input` to the `target` stage. `delta` is required for the small
/// stage and beyond; it is the delta of the *target* instance.
pub fn lower(
    input: &Instance,
    target: Fragment,
    delta: Option<&Rat>,
    tower: TowerMode,
) -> Result<PipelineOutput> {
    let goal = stage_index(target);
    if goal == 0 {
        return Err(Error::Param("nothing to lower to".into()));
    }
    if stage_index(input.fragment) >= goal {
        return Err(Error::Param(format!(
            "input is already at or beyond {}",
            target
        )));
    }
    let plan = if goal >= stage_index(Fragment::Small) {
        let d = delta.ok_or_else(|| {
            Error::Param(format!("lowering to {target} needs a target delta"))
        })?;
        Some(plan_deltas(target, d)?)
    } else {
        None
    };

    let mut cur = input.clone();
    let mut witness: Option<WitnessMap> = None;
    let mut reports = Vec::new();
    while stage_index(cur.fragment) < goal {
        let (next, map, report, stage) = match cur.fragment {
            Fragment::Etr => {
                let (i, w, r) = to_conj(&cur).map_err(|e| e.in_stage("conj"))?;
                (i, w, r, "conj")
            }
            Fragment::Conj => {
                let (i, w, r) =
                    compactify(&cur, tower).map_err(|e| e.in_stage("compact"))?;
                (i, w, r, "compact")
            }
            Fragment::Compact => {
                let (i, w, r) = to_ami(&cur).map_err(|e| e.in_stage("ami"))?;
                (i, w, r, "ami")
            }
            Fragment::Ami => {
                let plan = plan.as_ref().unwrap();
                // The scaling tower must strictly dominate the bounding
                // tower, or values at the bound land exactly on delta; the
                // size-derived heights have this built in, test heights get
                // one extra level.
                let t = match tower {
                    TowerMode::Test(h) => TowerMode::Test(h + 1),
                    exact => exact,
                };
                let (i, w, r) = to_small(&cur, &plan.small, t)
                    .map_err(|e| e.in_stage("small"))?;
                (i, w, r, "small")
            }
            Fragment::Small => {
                let d = plan.as_ref().unwrap().shift.as_ref().unwrap();
                let (i, w, r) = to_shift(&cur, d).map_err(|e| e.in_stage("shift"))?;
                (i, w, r, "shift")
            }
            Fragment::Shift => {
                let d = plan.as_ref().unwrap().square.as_ref().unwrap();
                let (i, w, r) = to_square(&cur, d).map_err(|e| e.in_stage("square"))?;
                (i, w, r, "square")
            }
            Fragment::Square => {
                let d = plan.as_ref().unwrap().inv.as_ref().unwrap();
                let (i, w, r) = to_inv(&cur, d).map_err(|e| e.in_stage("inv"))?;
                (i, w, r, "inv")
            }
            Fragment::Inv => unreachable!("inv is the last stage"),
        };
        witness = Some(match witness {
            None => map,
            Some(acc) => compose(&map, &acc).map_err(|e| e.in_stage(stage))?,
        });
        reports.push(report);
        cur = next;
    }

    Ok(PipelineOutput {
        instance: cur,
        witness: witness.expect("at least one pass ran"),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Instance;
    use crate::parser::parse_etr;
    use crate::validate::validate_fragment;
    use crate::witness::{round_trip_check, RoundTrip};
    use num_traits::Zero;

    fn etr_input() -> Instance {
        let (f, vars) = parse_etr("x + y = z /\\ x >= 0").unwrap();
        Instance::from_formula(f, vars)
    }

    #[test]
    fn derived_deltas_keep_exact_ratios() {
        let plan = plan_deltas(Fragment::Inv, &rat(1, 8)).unwrap();
        assert_eq!(plan.inv.unwrap(), rat(1, 8));
        assert_eq!(plan.square.unwrap(), rat(1, 14400));
        assert_eq!(plan.shift.unwrap(), rat(1, 144000));
        assert_eq!(plan.small, rat(1, 1 << 20));
        // 5 * small <= shift, as the shifting pass demands.
        assert!(plan.small * rat_int(5) <= rat(1, 144000));
    }

    #[test]
    fn lowering_to_conj_needs_no_delta() {
        let out = lower(&etr_input(), Fragment::Conj, None, TowerMode::Test(3)).unwrap();
        assert_eq!(out.instance.fragment, Fragment::Conj);
        assert_eq!(out.reports.len(), 1);
    }

    #[test]
    fn full_chain_reaches_inversions() {
        let out = lower(
            &etr_input(),
            Fragment::Inv,
            Some(&rat(1, 8)),
            TowerMode::Test(5),
        )
        .unwrap();
        assert_eq!(out.instance.fragment, Fragment::Inv);
        assert!(validate_fragment(&out.instance).is_empty());
        let stages: Vec<&str> = out.reports.iter().map(|r| r.stage.as_str()).collect();
        assert_eq!(
            stages,
            ["conj", "compact", "ami", "small", "shift", "square", "inv"]
        );
        // Solutions survive the whole chain.
        let point = vec![rat(1, 4), rat(1, 4), rat(1, 2)];
        assert_eq!(
            round_trip_check(&out.witness, &out.instance, &point),
            RoundTrip::Ok
        );
    }

    #[test]
    fn forward_image_fails_for_nonsolutions() {
        let out = lower(
            &etr_input(),
            Fragment::Inv,
            Some(&rat(1, 8)),
            TowerMode::Test(5),
        )
        .unwrap();
        let bad = vec![rat(1, 4), rat(1, 4), rat(1, 4)]; // x + y != z
        match out.witness.forward_apply(&bad) {
            Ok(image) => assert!(!out.instance.check_point(&image).unwrap()),
            Err(_) => {} // a vanishing slack denominator is also a refusal
        }
    }

    #[test]
    fn exact_tower_heights_overflow_the_budget_honestly() {
        let err = lower(
            &etr_input(),
            Fragment::Ami,
            None,
            TowerMode::PaperExact,
        )
        .unwrap_err();
        fn root(e: &Error) -> &Error {
            match e {
                Error::Stage { source, .. } => root(source),
                other => other,
            }
        }
        assert!(
            matches!(root(&err), Error::BudgetExceeded { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn missing_delta_is_rejected() {
        assert!(matches!(
            lower(&etr_input(), Fragment::Small, None, TowerMode::Test(3)),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            lower(&etr_input(), Fragment::Inv, Some(&Rat::zero()), TowerMode::Test(3)),
            Err(Error::Param(_))
        ));
    }
}
