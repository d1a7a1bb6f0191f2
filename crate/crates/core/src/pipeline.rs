//! End-to-end verification of an instance, stage by stage.

use serde::Serialize;
use serde_json::{json, Value};

use crate::chsh::{chsh_value, self_test_check, ChshInstance, SignVector};
use crate::error::{Error, Result};
use crate::families::tomography::local_tomography_check;
use crate::gpt::{consistency_check, merge_null_outcomes, reduce_instance, GptInstance};
use crate::repclass::{builtin_table, decompose_character};
use crate::teleport::analysis::{analyze_group, rank_one_check, GroupAnalysis};
use crate::teleport::closure::{semigroup_closure, SemigroupClosure};
use crate::teleport::game::{coarse_grain, iterated_game, swap_orbit_dimension, verify_homomorphism};
use crate::{CLOSURE_CAP, CONSISTENCY_DEPTH, EPS_DEDUP, TOL_EQ, TOL_RANK};

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub depth: usize,
    pub eps: f64,
    pub cap: usize,
    /// Multiplicity label the character must decompose to, if known.
    pub expected_label: Option<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { depth: 8, eps: EPS_DEDUP, cap: CLOSURE_CAP, expected_label: None }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidInput("depth must be at least 1".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidInput("eps must be positive".into()));
        }
        if self.cap == 0 {
            return Err(Error::InvalidInput("cap must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub name: &'static str,
    pub pass: bool,
    /// Informational stages never fail the run.
    pub enforced: bool,
    pub witness: Option<String>,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub failing_stages: Vec<&'static str>,
    pub chsh_value: f64,
    pub a: f64,
    pub group_order: Option<usize>,
    pub character: Option<Value>,
    pub label: Option<String>,
    pub stages: Vec<StageReport>,
}

impl VerifyReport {
    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }
}

struct Stages(Vec<StageReport>);

impl Stages {
    fn push(&mut self, name: &'static str, pass: bool, witness: Option<String>, detail: Value) {
        self.0.push(StageReport { name, pass, enforced: true, witness, detail });
    }

    fn info(&mut self, name: &'static str, detail: Value) {
        self.0.push(StageReport { name, pass: true, enforced: false, witness: None, detail });
    }

    fn error(&mut self, name: &'static str, e: &Error) {
        self.push(name, false, Some(e.to_string()), Value::Null);
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

/// Runs every stage and collects the failures; later stages run on the
/// reduced, null-merged instance.
pub fn verify_instance(inst: &GptInstance, cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut st = Stages(Vec::new());

    let mut work = inst.clone();
    let square_invertible = inst.rho().is_square() && inst.rho().rank(TOL_RANK) == inst.dim_a();
    if !square_invertible {
        match reduce_instance(inst, TOL_RANK) {
            Ok(r) => {
                st.info("reduce", json!({ "rank": r.instance.dim_a(), "original_dims": r.original_dims, "condition_number": r.condition_number }));
                work = r.instance;
            }
            Err(e) => st.error("reduce", &e),
        }
    }
    match merge_null_outcomes(&work) {
        Ok((merged, pairs)) => {
            if !pairs.is_empty() {
                st.info("merge_null_outcomes", json!({ "merged": pairs }));
            }
            work = merged;
        }
        Err(e) => st.error("merge_null_outcomes", &e),
    }

    match consistency_check(&work, cfg.depth.min(CONSISTENCY_DEPTH)) {
        Ok(r) => st.push("consistency", r.pass, r.first_witness.clone(), to_value(&r)),
        Err(e) => st.error("consistency", &e),
    }

    let chsh = ChshInstance::from_gpt(&work);
    let self_test = self_test_check(&chsh);
    let value = chsh_value(&chsh, &SignVector::STANDARD);
    st.push(
        "self_test",
        self_test.pass,
        (!self_test.pass).then(|| format!("a = {}, marginal defects {:?}", self_test.a, self_test.marginal_defects)),
        to_value(&self_test),
    );

    let residual = work.completeness_residual();
    st.push(
        "completeness",
        residual <= TOL_EQ,
        (residual > TOL_EQ).then(|| format!("sum of measurement effects deviates from unit (x) unit by {residual:e}")),
        json!({ "residual": residual }),
    );

    match verify_homomorphism(&work, cfg.depth) {
        Ok(r) => {
            let w = r.failures.first().map(|f| format!("[{}]: {}", f.word.join(", "), f.reason));
            st.push("verify_homomorphism", r.pass, w, to_value(&r));
        }
        Err(e) => st.error("verify_homomorphism", &e),
    }

    match iterated_game(&work, cfg.depth) {
        Ok(r) => st.push("iterated_game", r.pass, r.witness.clone(), to_value(&r)),
        Err(e) => st.error("iterated_game", &e),
    }

    let coarse = match coarse_grain(&work) {
        Ok(c) => {
            let res = c.completeness_residual();
            let labels: Vec<&str> = c.measurement().iter().map(|o| o.label.as_str()).collect();
            st.push(
                "coarse_grain",
                res <= TOL_EQ,
                (res > TOL_EQ).then(|| format!("coarse-grained completeness residual {res:e}")),
                json!({ "outcomes": labels, "completeness_residual": res }),
            );
            Some(c)
        }
        Err(e) => {
            st.error("coarse_grain", &e);
            None
        }
    };

    let group_inst = coarse.as_ref().unwrap_or(&work);
    let mut closure: Option<SemigroupClosure> = None;
    let mut analysis: Option<GroupAnalysis> = None;
    match semigroup_closure(group_inst, cfg.eps, cfg.cap) {
        Ok(c) => {
            match analyze_group(&c, group_inst) {
                Ok(g) => {
                    let (pass, why) = group_checks(&g);
                    st.push("semigroup", pass, why, semigroup_detail(&c, &g));
                    analysis = Some(g);
                }
                Err(e) => st.push("semigroup", false, Some(e.to_string()), json!({ "closure_size": c.len(), "truncated": c.truncated })),
            }
            closure = Some(c);
        }
        Err(e) => st.error("semigroup", &e),
    }

    let mut label = None;
    if let Some(g) = &analysis {
        let r = rank_one_check(g, group_inst);
        st.push(
            "rank_one",
            r.pass,
            (!r.pass).then(|| format!("residual {:e}, rank {}", r.residual, r.rank)),
            to_value(&r),
        );
        match g.group_tag {
            Some(tag) => match decompose_character(&g.character_values, &builtin_table(tag)) {
                Ok(m) => {
                    let l = m.label();
                    let matches = cfg.expected_label.as_ref().is_none_or(|e| *e == l);
                    st.push(
                        "character",
                        matches,
                        (!matches).then(|| format!("character decomposes to {l}, expected {}", cfg.expected_label.as_deref().unwrap_or(""))),
                        json!({ "multiplicities": m.n, "dimension": m.dimension, "label": l }),
                    );
                    label = Some(l);
                }
                Err(e) => st.error("character", &e),
            },
            None => st.push(
                "character",
                false,
                Some(format!("correction group of order {} has no built-in table", g.correction_group.len())),
                Value::Null,
            ),
        }
    }

    let tomo = local_tomography_check(&work);
    st.info("tomography", to_value(&tomo));
    if let Some(c) = &closure {
        let dim = swap_orbit_dimension(&work, c);
        let all_pass = st.0.iter().all(|s| s.pass);
        // the lower bound on the orbit dimension presupposes local tomography
        // and a stable CHSH value
        if tomo.locally_tomographic && all_pass {
            st.push(
                "swap_orbit",
                dim >= 3,
                (dim < 3).then(|| format!("swap orbit spans an affine space of dimension {dim}")),
                json!({ "dimension": dim }),
            );
        } else {
            st.info("swap_orbit", json!({ "dimension": dim }));
        }
    }

    let failing_stages: Vec<&'static str> = st.0.iter().filter(|s| s.enforced && !s.pass).map(|s| s.name).collect();
    Ok(VerifyReport {
        pass: failing_stages.is_empty(),
        failing_stages,
        chsh_value: value,
        a: self_test.a,
        group_order: analysis.as_ref().map(GroupAnalysis::group_order),
        character: analysis.as_ref().map(|g| to_value(&g.character_values)),
        label,
        stages: st.0,
    })
}

fn group_checks(g: &GroupAnalysis) -> (bool, Option<String>) {
    let mut why = Vec::new();
    if g.idempotent_count != 1 {
        why.push(format!("{} idempotents", g.idempotent_count));
    }
    if !g.correction_homomorphism {
        why.push("correction is not a homomorphism".to_string());
    }
    if g.group_tag.is_none() {
        why.push(format!("correction group of order {}", g.correction_group.len()));
    }
    if !g.class_function {
        why.push("character is not constant on classes".to_string());
    }
    if g.min_character_p() < -TOL_EQ {
        why.push(format!("character of P takes the value {}", g.min_character_p()));
    }
    if (g.trivial_multiplicity - 1.0).abs() > TOL_EQ {
        why.push(format!("trivial multiplicity {}", g.trivial_multiplicity));
    }
    (why.is_empty(), (!why.is_empty()).then(|| why.join("; ")))
}

pub fn semigroup_detail(c: &SemigroupClosure, g: &GroupAnalysis) -> Value {
    json!({
        "closure_size": c.len(),
        "truncated": c.truncated,
        "eps_dedup": c.eps_dedup,
        "group_order": g.group_order(),
        "idempotent_count": g.idempotent_count,
        "idempotent_rank": g.idempotent_rank,
        "group_tag": g.group_tag,
        "correction_group": g.correction_group.iter().map(|h| h.name()).collect::<Vec<_>>(),
        "correction_homomorphism": g.correction_homomorphism,
        "kernel_size": g.kernel_elements.len(),
        "character": g.character_values,
        "min_character_p": g.min_character_p(),
        "trivial_multiplicity": g.trivial_multiplicity,
        "weighted_sum_rank": g.weighted_sum_rank,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SemigroupReport {
    pub closure_size: usize,
    pub truncated: bool,
    pub group_order: usize,
    pub analysis: Value,
    pub multiplicities: Option<Vec<u32>>,
    pub label: Option<String>,
}

/// Closure and group analysis of an instance as given.
pub fn semigroup_report(inst: &GptInstance, eps: f64, cap: usize) -> Result<SemigroupReport> {
    let c = semigroup_closure(inst, eps, cap)?;
    let g = analyze_group(&c, inst)?;
    let decomposition = g.group_tag.and_then(|t| decompose_character(&g.character_values, &builtin_table(t)).ok());
    Ok(SemigroupReport {
        closure_size: c.len(),
        truncated: c.truncated,
        group_order: g.group_order(),
        analysis: semigroup_detail(&c, &g),
        multiplicities: decomposition.as_ref().map(|m| m.n.clone()),
        label: decomposition.map(|m| m.label()),
    })
}
