//! t-sets, the valid t-set universe, coverage queries, and the covering
//! array file format.
//!
//! A t-set fixes the state of exactly `t` features — some selected, some
//! unselected — and says nothing about the rest. It is *valid* if at least
//! one valid product agrees with it; only valid t-sets are coverage
//! obligations, since nothing can cover the rest. A t-wise covering array is
//! a list of valid products that covers every valid t-set.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::feature_model::{FeatureList, FeatureModel, FeatureSet, ModelError};
use crate::sat::{is_satisfiable, to_cnf, Lit};

/// Partial configuration of exactly `t` features.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TSet {
    sel: Vec<usize>,
    notsel: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TsetError {
    #[error("feature index {index} appears as both selected and unselected")]
    Overlap { index: usize },
    #[error("a t-set needs at least one feature")]
    Empty,
    #[error("feature index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },
}

impl TSet {
    pub fn new<I, J>(selected: I, unselected: J) -> Result<TSet, TsetError>
    where
        I: IntoIterator<Item = usize>,
        J: IntoIterator<Item = usize>,
    {
        let mut sel: Vec<usize> = selected.into_iter().collect();
        let mut notsel: Vec<usize> = unselected.into_iter().collect();
        sel.sort_unstable();
        sel.dedup();
        notsel.sort_unstable();
        notsel.dedup();
        if let Some(&index) = sel.iter().find(|i| notsel.binary_search(i).is_ok()) {
            return Err(TsetError::Overlap { index });
        }
        if sel.is_empty() && notsel.is_empty() {
            return Err(TsetError::Empty);
        }
        Ok(TSet { sel, notsel })
    }

    /// Number of features the t-set constrains.
    pub fn t(&self) -> usize {
        self.sel.len() + self.notsel.len()
    }

    pub fn selected(&self) -> &[usize] {
        &self.sel
    }

    pub fn unselected(&self) -> &[usize] {
        &self.notsel
    }

    /// The t-set as solver assumptions.
    pub fn literals(&self) -> Vec<Lit> {
        self.sel
            .iter()
            .map(|&i| Lit::positive(i))
            .chain(self.notsel.iter().map(|&i| Lit::negative(i)))
            .collect()
    }

    /// Human-readable form, e.g. `{+Driver, -Prim}`.
    pub fn display_with(&self, features: &FeatureList) -> String {
        let mut parts: Vec<(usize, String)> = self
            .sel
            .iter()
            .map(|&i| (i, format!("+{}", features.name(i))))
            .chain(
                self.notsel
                    .iter()
                    .map(|&i| (i, format!("-{}", features.name(i)))),
            )
            .collect();
        parts.sort_by_key(|&(i, _)| i);
        let body: Vec<String> = parts.into_iter().map(|(_, s)| s).collect();
        format!("{{{}}}", body.join(", "))
    }

    fn max_index(&self) -> usize {
        self.sel
            .iter()
            .chain(self.notsel.iter())
            .copied()
            .max()
            .expect("t-sets are non-empty")
    }
}

/// Does the product agree with the t-set on every feature it constrains?
pub fn covers(fs: &FeatureSet, ts: &TSet) -> Result<bool, TsetError> {
    let len = fs.num_features();
    let index = ts.max_index();
    if index >= len {
        return Err(TsetError::IndexOutOfRange { index, len });
    }
    Ok(ts.sel.iter().all(|&i| fs.is_selected(i))
        && ts.notsel.iter().all(|&i| !fs.is_selected(i)))
}

/// Is the t-set consistent with at least one valid product?
pub fn is_valid_tset(model: &FeatureModel, ts: &TSet) -> Result<bool, TsetError> {
    let index = ts.max_index();
    if index >= model.num_features() {
        return Err(TsetError::IndexOutOfRange {
            index,
            len: model.num_features(),
        });
    }
    let cnf = to_cnf(model);
    Ok(is_satisfiable(&cnf, &ts.literals()))
}

/// Every valid t-set of a model, in a fixed canonical order: feature index
/// tuples lexicographically, and within a tuple the polarity masks in
/// ascending binary order (bit `k` set means the tuple's `k`-th feature is
/// selected).
pub struct TSetUniverse {
    t: usize,
    num_features: usize,
    tsets: Vec<TSet>,
    /// t == 2 fast path: `[triangular pair index * 4 + polarity] -> ordinal`.
    pair_table: Vec<i32>,
    lookup: HashMap<(Vec<usize>, u32), usize>,
}

/// Enumerates the universe of valid t-sets. `t` must satisfy
/// `1 <= t <= model.num_features()`.
pub fn enumerate_valid_tsets(model: &FeatureModel, t: usize) -> TSetUniverse {
    TSetUniverse::enumerate(model, t)
}

impl TSetUniverse {
    pub fn enumerate(model: &FeatureModel, t: usize) -> TSetUniverse {
        let n = model.num_features();
        assert!(
            t >= 1 && t <= n,
            "strength t={t} out of range 1..={n} for model `{}`",
            model.name()
        );
        let cnf = to_cnf(model);
        let mut universe = TSetUniverse {
            t,
            num_features: n,
            tsets: Vec::new(),
            pair_table: if t == 2 {
                vec![-1; n * (n - 1) / 2 * 4]
            } else {
                Vec::new()
            },
            lookup: HashMap::new(),
        };
        let mut combo: Vec<usize> = (0..t).collect();
        loop {
            for mask in 0..(1u32 << t) {
                let assumptions: Vec<Lit> = combo
                    .iter()
                    .enumerate()
                    .map(|(k, &f)| {
                        if mask >> k & 1 == 1 {
                            Lit::positive(f)
                        } else {
                            Lit::negative(f)
                        }
                    })
                    .collect();
                if !is_satisfiable(&cnf, &assumptions) {
                    continue;
                }
                let ordinal = universe.tsets.len();
                if t == 2 {
                    let tri = triangular_index(n, combo[0], combo[1]);
                    universe.pair_table[tri * 4 + mask as usize] = ordinal as i32;
                }
                universe.lookup.insert((combo.clone(), mask), ordinal);
                let sel: Vec<usize> = combo
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &f)| f)
                    .collect();
                let notsel: Vec<usize> = combo
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask >> k & 1 == 0)
                    .map(|(_, &f)| f)
                    .collect();
                universe.tsets.push(TSet { sel, notsel });
            }
            if !advance_combination(&mut combo, n) {
                break;
            }
        }
        universe
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn len(&self) -> usize {
        self.tsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tsets.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> &TSet {
        &self.tsets[ordinal]
    }

    pub fn iter(&self) -> impl Iterator<Item = &TSet> {
        self.tsets.iter()
    }

    /// Ordinal of a t-set in canonical order, or `None` if it is not a valid
    /// t-set of this universe (wrong strength included).
    pub fn position(&self, ts: &TSet) -> Option<usize> {
        if ts.t() != self.t {
            return None;
        }
        let mut combo: Vec<usize> = ts.sel.iter().chain(ts.notsel.iter()).copied().collect();
        combo.sort_unstable();
        let mut mask = 0u32;
        for (k, &f) in combo.iter().enumerate() {
            if ts.sel.binary_search(&f).is_ok() {
                mask |= 1 << k;
            }
        }
        self.lookup.get(&(combo, mask)).copied()
    }

    /// Bitmask over the universe: which valid t-sets does this product cover?
    pub fn coverage_mask(&self, fs: &FeatureSet) -> FixedBitSet {
        let mut mask = FixedBitSet::with_capacity(self.tsets.len());
        self.coverage_mask_into(fs, &mut mask);
        mask
    }

    /// [`TSetUniverse::coverage_mask`] into a caller-owned buffer, for hot
    /// loops that compute masks per move. The buffer must have the
    /// universe's capacity; previous contents are overwritten.
    pub fn coverage_mask_into(&self, fs: &FeatureSet, mask: &mut FixedBitSet) {
        assert_eq!(
            fs.num_features(),
            self.num_features,
            "product and universe are over different models"
        );
        assert_eq!(mask.len(), self.tsets.len(), "mask buffer has the wrong capacity");
        mask.clear();
        if self.t == 2 {
            let n = self.num_features;
            let mut tri = 0usize;
            for i in 0..n {
                let bit_i = fs.is_selected(i) as usize;
                for j in i + 1..n {
                    let polarity = bit_i | ((fs.is_selected(j) as usize) << 1);
                    let ordinal = self.pair_table[tri * 4 + polarity];
                    if ordinal >= 0 {
                        mask.insert(ordinal as usize);
                    }
                    tri += 1;
                }
            }
        } else {
            let mut combo: Vec<usize> = (0..self.t).collect();
            loop {
                let mut polarity = 0u32;
                for (k, &f) in combo.iter().enumerate() {
                    if fs.is_selected(f) {
                        polarity |= 1 << k;
                    }
                }
                if let Some(&ordinal) = self.lookup.get(&(combo.clone(), polarity)) {
                    mask.insert(ordinal);
                }
                if !advance_combination(&mut combo, self.num_features) {
                    break;
                }
            }
        }
    }

    /// The exact difference between two products' coverage masks, expressed
    /// as (ordinal, covered-by-`new`) edits and derived only from the pairs
    /// that involve a feature in `changed` — the features on which the
    /// products disagree. Search moves alter a handful of features, so this
    /// is far cheaper than recomputing a mask over every pair. Pairwise
    /// universes only.
    pub fn pair_edits(
        &self,
        old: &FeatureSet,
        new: &FeatureSet,
        changed: &[usize],
        edits: &mut Vec<(usize, bool)>,
    ) {
        assert_eq!(self.t, 2, "pair edits only apply to pairwise universes");
        assert_eq!(
            old.num_features(),
            self.num_features,
            "product and universe are over different models"
        );
        assert_eq!(old.num_features(), new.num_features());
        edits.clear();
        let n = self.num_features;
        for &d in changed {
            for j in 0..n {
                if j == d || (j < d && changed.contains(&j)) {
                    continue; // pairs inside `changed` are handled once
                }
                let (i, jj) = if d < j { (d, j) } else { (j, d) };
                let tri = triangular_index(n, i, jj);
                let old_pol =
                    old.is_selected(i) as usize | ((old.is_selected(jj) as usize) << 1);
                let new_pol =
                    new.is_selected(i) as usize | ((new.is_selected(jj) as usize) << 1);
                debug_assert_ne!(old_pol, new_pol, "a changed feature flips the polarity");
                let old_ord = self.pair_table[tri * 4 + old_pol];
                let new_ord = self.pair_table[tri * 4 + new_pol];
                if old_ord >= 0 {
                    edits.push((old_ord as usize, false));
                }
                if new_ord >= 0 {
                    edits.push((new_ord as usize, true));
                }
            }
        }
    }
}

fn triangular_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Advances a sorted index combination to its lexicographic successor.
fn advance_combination(combo: &mut [usize], n: usize) -> bool {
    let t = combo.len();
    for k in (0..t).rev() {
        if combo[k] < n - (t - k) {
            combo[k] += 1;
            for m in k + 1..t {
                combo[m] = combo[m - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Valid t-sets of the universe that no product in the list covers, in
/// canonical order.
pub fn coverage_gap<'u>(universe: &'u TSetUniverse, products: &[FeatureSet]) -> Vec<&'u TSet> {
    let mut covered = FixedBitSet::with_capacity(universe.len());
    for fs in products {
        covered.union_with(&universe.coverage_mask(fs));
    }
    universe
        .tsets
        .iter()
        .enumerate()
        .filter(|&(i, _)| !covered.contains(i))
        .map(|(_, ts)| ts)
        .collect()
}

/// A generated (or loaded) t-wise covering array with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringArray {
    model_name: String,
    t: usize,
    algorithm: String,
    seed: u64,
    generation_ms: u64,
    products: Vec<FeatureSet>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CaParseError {
    #[error("covering array file is empty")]
    Empty,
    #[error("line {line}: expected header `ca <model> t=<t> algo=<name> seed=<seed> ms=<ms>`")]
    BadHeader { line: usize },
    #[error("covering array belongs to model `{found}`, not `{expected}`")]
    ModelMismatch { expected: String, found: String },
    #[error("line {line}: strength t={t} is out of range for {num_features} features")]
    BadStrength {
        line: usize,
        t: usize,
        num_features: usize,
    },
    #[error("line {line}: unknown feature `{name}`")]
    UnknownFeature { line: usize, name: String },
    #[error("line {line}: duplicate feature `{name}`")]
    DuplicateFeature { line: usize, name: String },
}

impl CoveringArray {
    pub fn new(
        model_name: impl Into<String>,
        t: usize,
        algorithm: impl Into<String>,
        seed: u64,
        generation_ms: u64,
        products: Vec<FeatureSet>,
    ) -> CoveringArray {
        CoveringArray {
            model_name: model_name.into(),
            t,
            algorithm: algorithm.into(),
            seed,
            generation_ms,
            products,
        }
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Wall-clock generation time, rounded up to at least one millisecond.
    pub fn generation_ms(&self) -> u64 {
        self.generation_ms
    }

    pub fn size(&self) -> usize {
        self.products.len()
    }

    pub fn products(&self) -> &[FeatureSet] {
        &self.products
    }

    /// Text form: a header line, then one product per line as its selected
    /// features in canonical feature order. Unselected features are implied.
    pub fn to_text(&self, model: &FeatureModel) -> String {
        let mut out = format!(
            "ca {} t={} algo={} seed={} ms={}\n",
            self.model_name, self.t, self.algorithm, self.seed, self.generation_ms
        );
        for fs in &self.products {
            let names: Vec<&str> = fs.selected().map(|i| model.features().name(i)).collect();
            out.push_str(&names.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the text form against a model. Rows are *not* checked for
    /// validity or coverage here; that is [`verify_covering_array`]'s job, so
    /// that broken files can still be loaded and diagnosed.
    pub fn parse(text: &str, model: &FeatureModel) -> Result<CoveringArray, CaParseError> {
        let mut lines = text.lines().enumerate();
        let (header_line, header) = loop {
            match lines.next() {
                None => return Err(CaParseError::Empty),
                Some((i, l)) if l.trim().is_empty() => {
                    let _ = i;
                }
                Some((i, l)) => break (i + 1, l),
            }
        };
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let bad_header = CaParseError::BadHeader { line: header_line };
        if tokens.len() != 6 || tokens[0] != "ca" {
            return Err(bad_header);
        }
        let model_name = tokens[1].to_string();
        let t: usize = parse_kv(tokens[2], "t").ok_or(CaParseError::BadHeader { line: header_line })?;
        let algorithm: String =
            parse_kv_str(tokens[3], "algo").ok_or(CaParseError::BadHeader { line: header_line })?;
        let seed: u64 =
            parse_kv(tokens[4], "seed").ok_or(CaParseError::BadHeader { line: header_line })?;
        let generation_ms: u64 =
            parse_kv(tokens[5], "ms").ok_or(CaParseError::BadHeader { line: header_line })?;
        if model_name != model.name() {
            return Err(CaParseError::ModelMismatch {
                expected: model.name().to_string(),
                found: model_name,
            });
        }
        if t < 1 || t > model.num_features() {
            return Err(CaParseError::BadStrength {
                line: header_line,
                t,
                num_features: model.num_features(),
            });
        }
        let mut products = Vec::new();
        for (i, raw) in lines {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let mut selected = Vec::new();
            for name in raw.split_whitespace() {
                let index = model.features().index_of(name).ok_or_else(|| {
                    CaParseError::UnknownFeature {
                        line,
                        name: name.to_string(),
                    }
                })?;
                if selected.contains(&index) {
                    return Err(CaParseError::DuplicateFeature {
                        line,
                        name: name.to_string(),
                    });
                }
                selected.push(index);
            }
            products.push(
                FeatureSet::from_selected(model.num_features(), selected)
                    .expect("indices come from the model's feature list"),
            );
        }
        Ok(CoveringArray {
            model_name,
            t,
            algorithm,
            seed,
            generation_ms,
            products,
        })
    }
}

fn parse_kv<T: std::str::FromStr>(token: &str, key: &str) -> Option<T> {
    let value = token.strip_prefix(key)?.strip_prefix('=')?;
    value.parse().ok()
}

fn parse_kv_str(token: &str, key: &str) -> Option<String> {
    let value = token.strip_prefix(key)?.strip_prefix('=')?;
    if value.is_empty() {
        None
    } else {
        Some(value.to_string())
    }
}

/// Outcome of checking a covering array against its model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    /// Row indices (0-based) that are not valid products.
    pub invalid_rows: Vec<usize>,
    /// Valid t-sets covered by no *valid* row.
    pub uncovered: Vec<TSet>,
    pub universe_size: usize,
}

impl VerifyReport {
    pub fn is_complete(&self) -> bool {
        self.invalid_rows.is_empty() && self.uncovered.is_empty()
    }
}

/// Checks that every row is a valid product and that the valid rows cover
/// the whole valid t-set universe. Invalid rows contribute no coverage.
pub fn verify_covering_array(
    model: &FeatureModel,
    ca: &CoveringArray,
) -> Result<VerifyReport, ModelError> {
    let mut invalid_rows = Vec::new();
    let mut valid_products = Vec::new();
    for (row, fs) in ca.products().iter().enumerate() {
        if model.validate_feature_set(fs)? {
            valid_products.push(fs.clone());
        } else {
            invalid_rows.push(row);
        }
    }
    let universe = TSetUniverse::enumerate(model, ca.t());
    let uncovered: Vec<TSet> = coverage_gap(&universe, &valid_products)
        .into_iter()
        .cloned()
        .collect();
    Ok(VerifyReport {
        invalid_rows,
        uncovered,
        universe_size: universe.len(),
    })
}
