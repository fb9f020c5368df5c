//! Encodes a feature model as CNF, shows the DIMACS form, and enumerates
//! every valid product with the bundled DPLL solver.
//!
//!     cargo run --example enumerate_products

use splcit::corpus;
use splcit::sat::{count_products, enumerate_products, to_cnf};

fn main() {
    let model = corpus::gpl();
    let cnf = to_cnf(&model);
    println!(
        "model {} encodes to {} variables and {} clauses",
        model.name(),
        cnf.num_vars(),
        cnf.num_clauses()
    );
    println!("--- DIMACS (first lines) ---");
    for line in cnf.to_dimacs().lines().take(8) {
        println!("{line}");
    }
    println!("...");

    let count = count_products(&model).expect("within the product cap");
    let products = enumerate_products(&model).expect("within the product cap");
    assert_eq!(count as usize, products.len());
    println!("{count} valid products, enumerated in lexicographic order:");

    let show = |index: usize| {
        let selected: Vec<&str> = products[index]
            .selected()
            .map(|f| model.features().name(f))
            .collect();
        println!("  product {index}: {}", selected.join(", "));
    };
    show(0);
    show(1);
    println!("  ...");
    show(products.len() - 1);
}
