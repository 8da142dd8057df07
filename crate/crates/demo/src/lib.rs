//! Browser demo: rejection-bound curve, structural alignment view and a
//! linearity-test simulation. Every export takes plain values and returns a
//! JSON string; failures come back as `{"error": "..."}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

use oracheck::alignment::{
    fixtures, leftover_phrases, ExemptTags, LexicalSimilarity, NodeSimilarity, ParseTree, Side,
    StructuralCandidates, Variant,
};
use oracheck::linearity::{judge_trial, rejection_bound, run_trial, sim};
use oracheck::oracle::Oracle;

fn respond<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string()),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

#[derive(Serialize)]
struct BoundPoint {
    epsilon: f64,
    bound: f64,
}

fn bound_points(n: u32, steps: u32) -> Result<Vec<BoundPoint>, String> {
    if steps == 0 {
        return Err("steps must be positive".into());
    }
    (1..=steps)
        .map(|i| {
            let epsilon = 0.5 * f64::from(i) / f64::from(steps);
            let bound = rejection_bound(epsilon, n).map_err(|e| e.to_string())?;
            Ok(BoundPoint { epsilon, bound })
        })
        .collect()
}

/// Rejection bound after `n` trials at `steps` evenly spaced ε in (0, 0.5].
#[wasm_bindgen]
pub fn bound_curve(n: u32, steps: u32) -> String {
    respond(bound_points(n, steps))
}

#[derive(Serialize)]
struct MappingView {
    source: String,
    target: String,
}

#[derive(Serialize)]
struct VariantView {
    variant: &'static str,
    complete: bool,
    mappings: Vec<MappingView>,
    leftover: Vec<String>,
}

#[derive(Serialize)]
struct AlignmentView {
    s1: String,
    s2: String,
    variants: Vec<VariantView>,
}

fn view(s1: &ParseTree, s2: &ParseTree, sim: &impl NodeSimilarity) -> Result<AlignmentView, String> {
    let exempt = ExemptTags::default();
    let candidates = StructuralCandidates::compute(s1, s2, sim, &exempt).map_err(|e| e.to_string())?;
    let variants = Variant::ALL
        .iter()
        .map(|&v| {
            let rho = candidates.get(v);
            let tree = match v.coverage_side() {
                Side::S1 => s1,
                Side::S2 => s2,
            };
            VariantView {
                variant: v.name(),
                complete: rho.is_complete(),
                mappings: rho
                    .mappings
                    .iter()
                    .map(|m| MappingView {
                        source: m.source_phrase.clone(),
                        target: m.target_phrase.clone(),
                    })
                    .collect(),
                leftover: leftover_phrases(tree, &rho.covered_token_ids, &exempt),
            }
        })
        .collect();
    Ok(AlignmentView {
        s1: s1.to_brackets(),
        s2: s2.to_brackets(),
        variants,
    })
}

fn fixture_view(name: &str) -> Result<AlignmentView, String> {
    let (s1, s2, sim) = match name {
        "elderly_gentleman" => fixtures::elderly_gentleman(),
        "de_sole" => fixtures::de_sole(),
        "around_the_world" => fixtures::around_the_world(),
        other => return Err(format!("unknown fixture '{other}'")),
    };
    view(&s1, &s2, &sim)
}

/// Structural ρ-alignments of a built-in fixture pair.
#[wasm_bindgen]
pub fn align_fixture(name: &str) -> String {
    respond(fixture_view(name))
}

/// Structural ρ-alignments of two bracketed trees under lexical similarity.
#[wasm_bindgen]
pub fn align_brackets(s1: &str, s2: &str) -> String {
    let parsed = ParseTree::from_brackets(s1)
        .and_then(|a| ParseTree::from_brackets(s2).map(|b| (a, b)))
        .map_err(|e| e.to_string());
    respond(parsed.and_then(|(a, b)| view(&a, &b, &LexicalSimilarity::new(ExemptTags::default()))))
}

#[derive(Serialize)]
struct Simulation {
    m: usize,
    epsilon: f64,
    /// Fraction of the 2^m inputs actually corrupted.
    distance: f64,
    trials: usize,
    rejected: usize,
    rejection_rate: f64,
    single_trial_bound: f64,
}

fn simulate(m: usize, epsilon: f64, trials: usize, seed: u64) -> Result<Simulation, String> {
    if !(1..=12).contains(&m) {
        return Err("m must be between 1 and 12".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = rejection_bound(epsilon, 1).map_err(|e| e.to_string())?;
    let (set, table) = sim::synthetic_sentence(m, &mut rng);
    let f = sim::corrupted_table(m, epsilon, &mut rng);
    let ideal: Vec<_> = (0..1u64 << m)
        .map(|i| oracheck::linearity::CharVector::from_index(i, m).complement())
        .collect();
    let distance = sim::distance(&f, &ideal);
    let oracle = Oracle::new(sim::table_extractor(&table, f));
    let mut rejected = 0;
    for _ in 0..trials {
        let mut session = oracle.session();
        let trial = run_trial(&set, &table, &mut session, &mut rng, 1).map_err(|e| e.to_string())?;
        rejected += usize::from(!judge_trial(&trial).passed);
    }
    Ok(Simulation {
        m,
        epsilon,
        distance,
        trials,
        rejected,
        rejection_rate: if trials == 0 { 0.0 } else { rejected as f64 / trials as f64 },
        single_trial_bound: bound,
    })
}

/// Runs single linearity trials against an extractor corrupted on ⌈ε·2^m⌉
/// inputs and reports the empirical rejection rate next to the bound.
#[wasm_bindgen]
pub fn simulate_linearity(m: usize, epsilon: f64, trials: usize, seed: u64) -> String {
    respond(simulate(m, epsilon, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn curve_rises_with_epsilon() {
        let v = parse(&bound_curve(10, 20));
        let pts = v.as_array().unwrap();
        assert_eq!(pts.len(), 20);
        let b: Vec<f64> = pts.iter().map(|p| p["bound"].as_f64().unwrap()).collect();
        // 1 - (1 - q)^n with q = 3ε - 6ε² for ε ≤ 1/4
        let at = |eps: f64| 1.0 - (1.0 - (3.0 * eps - 6.0 * eps * eps)).powi(10);
        assert!((b[0] - at(0.025)).abs() < 1e-12);
        assert!((b[9] - at(0.25)).abs() < 1e-12);
        assert!(parse(&bound_curve(10, 0))["error"].is_string());
    }

    #[test]
    fn fixture_alignment_lists_leftovers() {
        let v = parse(&align_fixture("around_the_world"));
        let variants = v["variants"].as_array().unwrap();
        assert_eq!(variants.len(), 4);
        let forward = &variants[0];
        assert_eq!(forward["variant"], "S1toS2");
        assert_eq!(forward["leftover"], json!(["around the world"]));
        assert!(parse(&align_fixture("nope"))["error"].is_string());
    }

    #[test]
    fn bracket_input_is_aligned() {
        let t = "(S (NP (DT the) (JJ old) (NN dog)) (VP (VBD chased) (NNS cats)) (. .))";
        let v = parse(&align_brackets(t, t));
        assert!(v["variants"].as_array().unwrap().iter().all(|x| x["complete"] == true));
        assert!(parse(&align_brackets("(S", t))["error"].is_string());
    }

    #[test]
    fn simulation_meets_bound_on_average() {
        let v = parse(&simulate_linearity(5, 0.25, 2000, 3));
        let rate = v["rejection_rate"].as_f64().unwrap();
        let bound = v["single_trial_bound"].as_f64().unwrap();
        // three standard errors below the bound
        let se = (bound * (1.0 - bound) / 2000.0).sqrt();
        assert!(rate >= bound - 3.0 * se, "{rate} < {bound}");
        assert_eq!(v["distance"], 0.25);
        assert!(parse(&simulate_linearity(0, 0.1, 1, 0))["error"].is_string());
    }
}
