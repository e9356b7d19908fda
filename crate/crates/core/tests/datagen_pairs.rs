//! DFS data generation over the scripted split fixtures: every chosen/rejected
//! split of five samples at the first hint, plus a mixed run over all puzzles.

use asploop_core::datagen::{export_jsonl, read_jsonl, run_dfs, DatagenConfig, DatagenOutput, PreferenceRecord, SftRecord};
use asploop_core::fixtures::scenarios::SCENARIO_PUZZLE;
use asploop_core::fixtures::FixtureSet;
use asploop_core::matching::any_model_matches;
use asploop_core::puzzle::{expected_model_count, PuzzleInstance};
use asploop_core::solver::Gateway;
use asploop_core::trajectory::{DEFAULT_PREAMBLE, ENCODING_HEADER};

fn dfs(set: &FixtureSet, file: &str, id: &str) -> DatagenOutput {
    let inst = set.puzzle(id).unwrap();
    let generator = set.scripted(file).unwrap();
    run_dfs(inst, &generator, &Gateway::internal(), &DatagenConfig::default(), &[], DEFAULT_PREAMBLE).unwrap()
}

fn law(chosen: usize, rejected: usize) -> usize {
    if chosen == 0 || rejected == 0 {
        0
    } else {
        chosen.min(2) * rejected
    }
}

fn assert_pair_law(out: &DatagenOutput) {
    for s in &out.stats.steps {
        assert_eq!(s.pairs, law(s.chosen, s.rejected), "{s:?}");
        assert_eq!(s.chosen + s.rejected, 5, "{s:?}");
    }
    assert_eq!(out.pref.len(), out.stats.steps.iter().map(|s| s.pairs).sum::<usize>());
    assert_eq!(out.sft.len(), out.stats.steps.iter().map(|s| s.chosen).sum::<usize>());
}

/// Encoding blocks already in a hint prompt, in order.
fn prompt_blocks(prompt: &str) -> Vec<&str> {
    prompt.split(ENCODING_HEADER).skip(1).map(|part| part.split("\n\n").next().unwrap_or_default()).collect()
}

/// Re-solves every SFT completion on top of its prompt's partial program.
fn assert_sft_recheck(out: &DatagenOutput, inst: &PuzzleInstance) {
    let gateway = Gateway::internal();
    let expected = expected_model_count(inst).unwrap() as usize;
    for r in &out.sft {
        let mut blocks = prompt_blocks(&r.prompt);
        blocks.push(&r.completion);
        let v = gateway.solve(&blocks.join("\n"), 4 * expected);
        assert!(v.flagless(), "{}: {:?}", r.meta.branch, v.diagnostics());
        if r.meta.step == 0 {
            assert_eq!(v.model_count(), expected);
        } else {
            assert!(any_model_matches(v.models(), inst), "{:?}", r.meta);
        }
    }
}

#[test]
fn every_split_follows_the_pair_law() {
    let set = FixtureSet::load_default().unwrap();
    let inst = set.puzzle(SCENARIO_PUZZLE).unwrap();
    let mut seen = Vec::new();
    for c in 0..=5 {
        let out = dfs(&set, &format!("datagen_c{c}.jsonl"), SCENARIO_PUZZLE);
        assert_pair_law(&out);
        let first: Vec<_> = out.stats.steps.iter().filter(|s| s.step == 1).collect();
        assert_eq!(first.len(), 1);
        assert_eq!((first[0].chosen, first[0].rejected), (c, 5 - c));
        seen.push(first[0].pairs);
        // Branching stops at two chosen candidates; an all-rejected step
        // continues on the same branch.
        let second = out.stats.steps.iter().filter(|s| s.step == 2).count();
        assert_eq!(second, c.clamp(1, 2), "c = {c}");
        assert_sft_recheck(&out, inst);
    }
    assert_eq!(seen, vec![0, 4, 6, 4, 2, 0]);
}

#[test]
fn worked_example_splits() {
    let set = FixtureSet::load_default().unwrap();
    // 1 chosen, 4 rejected: 4 pairs. 2 chosen, 3 rejected: 6 pairs.
    for (c, pairs) in [(1, 4), (2, 6)] {
        let out = dfs(&set, &format!("datagen_c{c}.jsonl"), SCENARIO_PUZZLE);
        let step = out.stats.steps.iter().find(|s| s.step == 1).unwrap();
        assert_eq!(step.pairs, pairs);
        assert_eq!(out.pref.iter().filter(|p| p.meta.step == 1).count(), pairs);
    }
    // 5 chosen: no pairs, five SFT records, two branches.
    let out = dfs(&set, "datagen_c5.jsonl", SCENARIO_PUZZLE);
    assert_eq!(out.pref.iter().filter(|p| p.meta.step == 1).count(), 0);
    assert_eq!(out.sft.iter().filter(|r| r.meta.step == 1).count(), 5);
    let branches: std::collections::BTreeSet<&str> = out.sft.iter().filter(|r| r.meta.step == 2).map(|r| r.meta.branch.as_str()).collect();
    assert_eq!(branches.len(), 2);
}

#[test]
fn all_rejected_hint_is_dropped_everywhere() {
    let set = FixtureSet::load_default().unwrap();
    let inst = set.puzzle(SCENARIO_PUZZLE).unwrap();
    let out = dfs(&set, "datagen_c0.jsonl", SCENARIO_PUZZLE);
    assert_eq!(out.stats.dropped_hints.len(), 1);
    assert_eq!(out.stats.dropped_hints[0].1, 0);
    let hint = inst.hints[0].trim();
    assert!(!inst.description.contains(hint));
    assert!(out.sft.iter().all(|r| !r.prompt.contains(hint)));
    assert!(out.pref.iter().all(|r| !r.prompt.contains(hint)));
    // The remaining hints are still visited.
    let steps: Vec<usize> = out.stats.steps.iter().map(|s| s.step).collect();
    assert_eq!(steps, (0..=inst.hints.len()).collect::<Vec<_>>());
}

#[test]
fn mixed_run_over_every_puzzle() {
    let set = FixtureSet::load_default().unwrap();
    for inst in &set.puzzles {
        let out = dfs(&set, "datagen_mixed.jsonl", &inst.id);
        assert_pair_law(&out);
        assert!(out.stats.dropped_hints.iter().all(|(_, h)| *h == 1), "{}", inst.id);
        assert_eq!(out.stats.dropped_hints.len(), 2, "{}", inst.id);
        let dropped = inst.hints[1].trim();
        assert!(out.sft.iter().all(|r| !r.prompt.contains(dropped)), "{}", inst.id);
        assert!(out.pref.iter().all(|r| !r.prompt.contains(dropped)), "{}", inst.id);
        assert!(out.stats.mean_chosen > 0.0);
    }
}

#[test]
fn exports_are_deterministic_and_round_trip() {
    let set = FixtureSet::load_default().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for run in 0..2 {
        let out = dfs(&set, "datagen_c2.jsonl", SCENARIO_PUZZLE);
        let sft = dir.path().join(format!("sft{run}.jsonl"));
        let pref = dir.path().join(format!("pref{run}.jsonl"));
        assert_eq!(export_jsonl(&out.sft, &sft).unwrap(), out.sft.len());
        assert_eq!(export_jsonl(&out.pref, &pref).unwrap(), out.pref.len());
        assert_eq!(read_jsonl::<SftRecord>(&sft).unwrap(), out.sft);
        assert_eq!(read_jsonl::<PreferenceRecord>(&pref).unwrap(), out.pref);
        texts.push((std::fs::read(&sft).unwrap(), std::fs::read(&pref).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
}
