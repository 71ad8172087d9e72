use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use phonoblocks::layout::{mds_2d, phoneme_keyboard, similarity, GridConfig, MdsConfig, MdsMethod};
use phonoblocks::lexicon::{Lexicon, LexiconConfig, Phoneme, WordFrequencies};
use phonoblocks::study::{child_ids, design_trials, fit_error_model, simulate_minigame, GenParams, McmcConfig};
use phonoblocks::wordplay::{interpret, Block};
use phonoblocks_bench::{data_dir, dictionary};

fn alignment(c: &mut Criterion) {
    let entries = dictionary(Some(5000));
    let mut g = c.benchmark_group("alignment");
    g.sample_size(10);
    g.bench_function("train_5k_entries", |b| {
        b.iter_batched(
            || entries.clone(),
            |e| Lexicon::build(e, &LexiconConfig::default()).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

fn interpreter(c: &mut Criterion) {
    let (lex, _) = Lexicon::build(dictionary(None), &LexiconConfig::default()).unwrap();
    let lex = lex.with_frequencies(WordFrequencies::load(&data_dir().join("wordfreq_en.tsv")).unwrap());
    let letters = |s: &str| -> Vec<Block> { s.chars().enumerate().map(|(i, ch)| Block::letter(i as u32, ch)).collect() };
    let fes = letters("FES");
    let ship: Vec<Block> = [Phoneme::SH, Phoneme::IH, Phoneme::P]
        .into_iter()
        .enumerate()
        .map(|(i, p)| Block::phoneme(i as u32, p))
        .collect();
    // the first query builds the index
    interpret(&fes, &lex, 10);
    let mut g = c.benchmark_group("interpret");
    g.bench_function("letters_FES_top10", |b| b.iter(|| interpret(black_box(&fes), &lex, 10)));
    g.bench_function("phonemes_SHIP_top10", |b| b.iter(|| interpret(black_box(&ship), &lex, 10)));
    g.bench_function("letters_ELEFANT_top10", |b| {
        let blocks = letters("ELEFANT");
        b.iter(|| interpret(black_box(&blocks), &lex, 10))
    });
    g.finish();
}

fn layout(c: &mut Criterion) {
    let m = similarity(&Phoneme::ALL);
    let mut g = c.benchmark_group("layout");
    g.bench_function("classical_mds_39", |b| b.iter(|| mds_2d(black_box(&m), &MdsConfig::default()).unwrap()));
    let smacof = MdsConfig {
        method: MdsMethod::Smacof,
        ..MdsConfig::default()
    };
    g.bench_function("smacof_39", |b| b.iter(|| mds_2d(black_box(&m), &smacof).unwrap()));
    g.bench_function("phoneme_keyboard", |b| {
        b.iter(|| phoneme_keyboard(&MdsConfig::default(), GridConfig::default()).unwrap())
    });
    g.finish();
}

fn mcmc(c: &mut Criterion) {
    let specs = design_trials(&child_ids(8), 1).unwrap();
    let records = simulate_minigame(&specs, &GenParams::default(), 1).unwrap();
    let cfg = McmcConfig {
        iters: 500,
        warmup: 250,
        ..McmcConfig::default()
    };
    let mut g = c.benchmark_group("mcmc");
    g.sample_size(10);
    g.bench_function("errors_8_children_4x500", |b| b.iter(|| fit_error_model(black_box(&records), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, alignment, interpreter, layout, mcmc);
criterion_main!(benches);
