//! Parses a feature model and prints what a test planner would want to
//! know before picking an interaction strength: product count, feature
//! classification, and the size of each t-set universe.
//!
//!     cargo run --example analyze_model

use splcit::corpus;
use splcit::feature_model::FeatureModel;
use splcit::sat::enumerate_products;
use splcit::tset::enumerate_valid_tsets;

fn main() {
    let model = corpus::gpl();
    println!("model {} with {} features:", model.name(), model.num_features());
    for name in model.features().iter() {
        print!("  {name}");
    }
    println!();

    // The same model can be serialized back out and re-parsed.
    let round_trip = FeatureModel::parse(&model.serialize()).expect("own output parses");
    assert_eq!(round_trip, model);

    let products = enumerate_products(&model).expect("model is within the product cap");
    println!("{} valid products", products.len());

    let classes = model.classify_features(&products).expect("products are well formed");
    let names = |ids: &[usize]| {
        ids.iter().map(|&f| model.features().name(f)).collect::<Vec<_>>().join(", ")
    };
    println!("core features ({}): {}", classes.core().len(), names(classes.core()));
    println!("variant features ({}): {}", classes.variant().len(), names(classes.variant()));
    println!("dead features ({}): {}", classes.dead().len(), names(classes.dead()));

    for t in 1..=3 {
        let universe = enumerate_valid_tsets(&model, t);
        println!("{} valid {t}-sets", universe.len());
    }
}
