//! Feature models and their text format.
//!
//! A model is a rooted tree of named features. Every non-root feature relates
//! to its parent as `mandatory` (selected whenever the parent is), `optional`,
//! or through a group: `xor` groups require exactly one selected member when
//! the parent is selected, `or` groups at least one. Cross-tree constraints
//! add `requires`/`excludes` edges between arbitrary features.
//!
//! The text format is line oriented, one statement per line, `#` starts a
//! comment:
//!
//! ```text
//! model phone
//! root Phone
//! mandatory Screen Phone
//! xor Screen Basic Colour
//! optional GPS Phone
//! requires GPS Colour
//! ```
//!
//! `model` and `root` must come first, in that order. Every other statement
//! may appear in any order, with one restriction: a statement that *uses* a
//! feature (as a parent of a `mandatory`/`optional` child, or as a constraint
//! endpoint) must come after the statement that declares it. The exception is
//! the parent of an `xor`/`or` group, which may be declared later.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

/// Canonical feature order of a model: declaration order, root first.
///
/// All indices used throughout the crate (feature sets, t-sets, CNF
/// variables) refer to positions in this list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureList(Vec<String>);

impl FeatureList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// How a feature hangs off its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// The root feature; always selected in a valid product.
    Root,
    /// Selected if and only if the parent is selected.
    Mandatory { parent: usize },
    /// Freely selectable when the parent is selected.
    Optional { parent: usize },
    /// Member of `model.groups()[group]`.
    Grouped { parent: usize, group: usize },
}

impl Relation {
    pub fn parent(&self) -> Option<usize> {
        match *self {
            Relation::Root => None,
            Relation::Mandatory { parent }
            | Relation::Optional { parent }
            | Relation::Grouped { parent, .. } => Some(parent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// Exactly one member selected when the parent is selected.
    Xor,
    /// At least one member selected when the parent is selected.
    Or,
}

impl GroupKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            GroupKind::Xor => "xor",
            GroupKind::Or => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub kind: GroupKind,
    pub parent: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtcKind {
    /// Selecting `source` forces `target`.
    Requires,
    /// `source` and `target` are mutually exclusive.
    Excludes,
}

impl CtcKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            CtcKind::Requires => "requires",
            CtcKind::Excludes => "excludes",
        }
    }
}

/// Cross-tree constraint between two distinct features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossTreeConstraint {
    pub kind: CtcKind,
    pub source: usize,
    pub target: usize,
}

/// A parsed feature model. Immutable once built; shares freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    name: String,
    features: FeatureList,
    relations: Vec<Relation>,
    groups: Vec<Group>,
    constraints: Vec<CrossTreeConstraint>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: unknown statement `{word}`")]
    UnknownStatement { line: usize, col: usize, word: String },
    #[error("line {line}, column {col}: duplicate feature `{name}`")]
    DuplicateFeature { line: usize, col: usize, name: String },
    #[error("line {line}, column {col}: unknown parent `{name}`")]
    UnknownParent { line: usize, col: usize, name: String },
    #[error("line {line}, column {col}: a group needs at least two members")]
    GroupTooSmall { line: usize, col: usize },
    #[error("line {line}, column {col}: unknown feature `{name}`")]
    UnknownFeature { line: usize, col: usize, name: String },
    #[error("missing `model <name>` declaration")]
    MissingModel,
    #[error("missing `root <feature>` declaration")]
    MissingRoot,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("feature set has {got} features but model `{model}` has {want}")]
    DimensionMismatch { model: String, got: usize, want: usize },
    #[error("product set is empty; the model admits no classification")]
    EmptyProductSet,
}

/// Total assignment over a model's features: every feature is either
/// selected or unselected.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FeatureSet {
    bits: FixedBitSet,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureSetError {
    #[error("feature index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("feature index {index} listed as both selected and unselected")]
    Overlap { index: usize },
    #[error("feature index {index} is neither selected nor unselected")]
    Incomplete { index: usize },
}

impl FeatureSet {
    /// Builds a set over `len` features with the given indices selected and
    /// everything else unselected.
    pub fn from_selected<I>(len: usize, selected: I) -> Result<Self, FeatureSetError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut bits = FixedBitSet::with_capacity(len);
        for index in selected {
            if index >= len {
                return Err(FeatureSetError::IndexOutOfRange { index, len });
            }
            bits.insert(index);
        }
        Ok(FeatureSet { bits })
    }

    /// Builds a set from explicit selected and unselected parts, requiring
    /// them to be disjoint and to cover every feature.
    pub fn from_parts<I, J>(len: usize, selected: I, unselected: J) -> Result<Self, FeatureSetError>
    where
        I: IntoIterator<Item = usize>,
        J: IntoIterator<Item = usize>,
    {
        let mut sel = FixedBitSet::with_capacity(len);
        let mut unsel = FixedBitSet::with_capacity(len);
        for index in selected {
            if index >= len {
                return Err(FeatureSetError::IndexOutOfRange { index, len });
            }
            sel.insert(index);
        }
        for index in unselected {
            if index >= len {
                return Err(FeatureSetError::IndexOutOfRange { index, len });
            }
            if sel.contains(index) {
                return Err(FeatureSetError::Overlap { index });
            }
            unsel.insert(index);
        }
        for index in 0..len {
            if !sel.contains(index) && !unsel.contains(index) {
                return Err(FeatureSetError::Incomplete { index });
            }
        }
        Ok(FeatureSet { bits: sel })
    }

    pub(crate) fn from_bools(values: &[bool]) -> Self {
        let mut bits = FixedBitSet::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if v {
                bits.insert(i);
            }
        }
        FeatureSet { bits }
    }

    pub(crate) fn to_bools(&self) -> Vec<bool> {
        (0..self.bits.len()).map(|i| self.bits.contains(i)).collect()
    }

    pub fn num_features(&self) -> usize {
        self.bits.len()
    }

    pub fn is_selected(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn unselected(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.zeroes()
    }

    pub fn count_selected(&self) -> usize {
        self.bits.count_ones(..)
    }
}

impl fmt::Debug for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureSet{:?}", self.selected().collect::<Vec<_>>())
    }
}

/// Partition of a model's features by their role across all valid products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureClasses {
    core: Vec<usize>,
    variant: Vec<usize>,
    dead: Vec<usize>,
    variant_mask: FixedBitSet,
}

impl FeatureClasses {
    /// Features selected in every product.
    pub fn core(&self) -> &[usize] {
        &self.core
    }

    /// Features selected in some products but not all.
    pub fn variant(&self) -> &[usize] {
        &self.variant
    }

    /// Features selected in no product; usually a modelling mistake.
    pub fn dead(&self) -> &[usize] {
        &self.dead
    }

    pub fn is_variant(&self, index: usize) -> bool {
        self.variant_mask.contains(index)
    }
}

impl FeatureModel {
    /// Parses the line-oriented model format described at module level.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::default().run(text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &FeatureList {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn relation(&self, index: usize) -> Relation {
        self.relations[index]
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn constraints(&self) -> &[CrossTreeConstraint] {
        &self.constraints
    }

    /// Renders the model back to its text format. The output parses to a
    /// structurally identical model, with identical feature indices.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("model {}\n", self.name));
        out.push_str(&format!("root {}\n", self.features.name(0)));
        for index in 1..self.features.len() {
            match self.relations[index] {
                Relation::Root => unreachable!("only feature 0 is the root"),
                Relation::Mandatory { parent } => {
                    out.push_str(&format!(
                        "mandatory {} {}\n",
                        self.features.name(index),
                        self.features.name(parent)
                    ));
                }
                Relation::Optional { parent } => {
                    out.push_str(&format!(
                        "optional {} {}\n",
                        self.features.name(index),
                        self.features.name(parent)
                    ));
                }
                Relation::Grouped { group, .. } => {
                    let g = &self.groups[group];
                    // The whole group is emitted where its first member was
                    // declared; group parents may legally resolve forward.
                    if g.members[0] == index {
                        out.push_str(g.kind.keyword());
                        out.push(' ');
                        out.push_str(self.features.name(g.parent));
                        for &m in &g.members {
                            out.push(' ');
                            out.push_str(self.features.name(m));
                        }
                        out.push('\n');
                    }
                }
            }
        }
        for ctc in &self.constraints {
            out.push_str(&format!(
                "{} {} {}\n",
                ctc.kind.keyword(),
                self.features.name(ctc.source),
                self.features.name(ctc.target)
            ));
        }
        out
    }

    /// Checks whether a total assignment is a valid product of this model:
    /// the root is selected, tree and group rules hold, and every cross-tree
    /// constraint is satisfied.
    pub fn validate_feature_set(&self, fs: &FeatureSet) -> Result<bool, ModelError> {
        if fs.num_features() != self.num_features() {
            return Err(ModelError::DimensionMismatch {
                model: self.name.clone(),
                got: fs.num_features(),
                want: self.num_features(),
            });
        }
        if !fs.is_selected(0) {
            return Ok(false);
        }
        for index in 1..self.num_features() {
            let parent = self.relations[index]
                .parent()
                .expect("non-root features have parents");
            if fs.is_selected(index) && !fs.is_selected(parent) {
                return Ok(false);
            }
            if let Relation::Mandatory { parent } = self.relations[index] {
                if fs.is_selected(parent) && !fs.is_selected(index) {
                    return Ok(false);
                }
            }
        }
        for group in &self.groups {
            if !fs.is_selected(group.parent) {
                continue;
            }
            let selected = group
                .members
                .iter()
                .filter(|&&m| fs.is_selected(m))
                .count();
            let ok = match group.kind {
                GroupKind::Xor => selected == 1,
                GroupKind::Or => selected >= 1,
            };
            if !ok {
                return Ok(false);
            }
        }
        for ctc in &self.constraints {
            let violated = match ctc.kind {
                CtcKind::Requires => fs.is_selected(ctc.source) && !fs.is_selected(ctc.target),
                CtcKind::Excludes => fs.is_selected(ctc.source) && fs.is_selected(ctc.target),
            };
            if violated {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Splits features into core/variant/dead given the complete set of
    /// valid products.
    pub fn classify_features(
        &self,
        all_products: &[FeatureSet],
    ) -> Result<FeatureClasses, ModelError> {
        if all_products.is_empty() {
            return Err(ModelError::EmptyProductSet);
        }
        for fs in all_products {
            if fs.num_features() != self.num_features() {
                return Err(ModelError::DimensionMismatch {
                    model: self.name.clone(),
                    got: fs.num_features(),
                    want: self.num_features(),
                });
            }
        }
        let n = self.num_features();
        let mut core = Vec::new();
        let mut variant = Vec::new();
        let mut dead = Vec::new();
        let mut variant_mask = FixedBitSet::with_capacity(n);
        for index in 0..n {
            let count = all_products
                .iter()
                .filter(|fs| fs.is_selected(index))
                .count();
            if count == all_products.len() {
                core.push(index);
            } else if count == 0 {
                dead.push(index);
            } else {
                variant.push(index);
                variant_mask.insert(index);
            }
        }
        Ok(FeatureClasses {
            core,
            variant,
            dead,
            variant_mask,
        })
    }
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Token with its 1-based column, comments already stripped.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let body = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    // Track columns by char count so errors point at the right place even
    // with multi-byte text around.
    let mut col = 0usize;
    let mut byte_of_col = Vec::new();
    for (byte, ch) in body.char_indices() {
        col += 1;
        byte_of_col.push((col, byte));
        if ch.is_whitespace() {
            if let Some((scol, sbyte)) = start.take() {
                tokens.push((scol, &body[sbyte..byte]));
            }
        } else if start.is_none() {
            start = Some((col, byte));
        }
    }
    if let Some((scol, sbyte)) = start {
        tokens.push((scol, &body[sbyte..]));
    }
    tokens
}

#[derive(Default)]
struct Parser {
    name: Option<String>,
    features: Vec<String>,
    index: HashMap<String, usize>,
    relations: Vec<Relation>,
    groups: Vec<Group>,
    // Group parents resolve after the whole file is read.
    pending_parents: Vec<(String, usize, usize)>,
    group_lines: Vec<(usize, usize)>,
    constraints: Vec<CrossTreeConstraint>,
}

impl Parser {
    fn run(mut self, text: &str) -> Result<FeatureModel, ParseError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let tokens = tokenize(raw);
            if tokens.is_empty() {
                continue;
            }
            self.statement(line, &tokens)?;
        }
        if self.name.is_none() {
            return Err(ParseError::MissingModel);
        }
        if self.features.is_empty() {
            return Err(ParseError::MissingRoot);
        }
        for (gi, (pname, line, col)) in self.pending_parents.iter().enumerate() {
            let parent = *self
                .index
                .get(pname)
                .ok_or_else(|| ParseError::UnknownFeature {
                    line: *line,
                    col: *col,
                    name: pname.clone(),
                })?;
            if self.groups[gi].members.contains(&parent) {
                return Err(ParseError::Syntax {
                    line: *line,
                    col: *col,
                    msg: format!("group parent `{pname}` is one of its own members"),
                });
            }
            self.groups[gi].parent = parent;
            for &m in &self.groups[gi].members {
                if let Relation::Grouped { parent: p, .. } = &mut self.relations[m] {
                    *p = parent;
                }
            }
        }
        self.check_acyclic()?;
        Ok(FeatureModel {
            name: self.name.expect("checked above"),
            features: FeatureList(self.features),
            relations: self.relations,
            groups: self.groups,
            constraints: self.constraints,
        })
    }

    fn statement(&mut self, line: usize, tokens: &[(usize, &str)]) -> Result<(), ParseError> {
        let (kcol, keyword) = tokens[0];
        let args = &tokens[1..];
        if self.name.is_none() && keyword != "model" {
            return Err(ParseError::MissingModel);
        }
        if self.name.is_some() && self.features.is_empty() && keyword != "root" {
            return Err(ParseError::MissingRoot);
        }
        match keyword {
            "model" => {
                if self.name.is_some() {
                    return Err(ParseError::Syntax {
                        line,
                        col: kcol,
                        msg: "duplicate `model` declaration".into(),
                    });
                }
                let (col, name) = self.one_arg(line, kcol, "model <name>", args)?;
                if !valid_identifier(name) {
                    return Err(self.bad_identifier(line, col, name));
                }
                self.name = Some(name.to_string());
            }
            "root" => {
                if !self.features.is_empty() {
                    return Err(ParseError::Syntax {
                        line,
                        col: kcol,
                        msg: "duplicate `root` declaration".into(),
                    });
                }
                let (col, name) = self.one_arg(line, kcol, "root <feature>", args)?;
                self.declare(line, col, name, Relation::Root)?;
            }
            "mandatory" | "optional" => {
                let (ccol, child, pcol, parent) =
                    self.two_args(line, kcol, "<child> <parent>", args)?;
                let parent =
                    *self
                        .index
                        .get(parent)
                        .ok_or_else(|| ParseError::UnknownParent {
                            line,
                            col: pcol,
                            name: parent.to_string(),
                        })?;
                let relation = if keyword == "mandatory" {
                    Relation::Mandatory { parent }
                } else {
                    Relation::Optional { parent }
                };
                self.declare(line, ccol, child, relation)?;
            }
            "xor" | "or" => {
                if args.len() < 3 {
                    if args.len() < 2 {
                        return Err(ParseError::Syntax {
                            line,
                            col: kcol,
                            msg: format!("expected `{keyword} <parent> <members...>`"),
                        });
                    }
                    return Err(ParseError::GroupTooSmall { line, col: kcol });
                }
                let kind = if keyword == "xor" {
                    GroupKind::Xor
                } else {
                    GroupKind::Or
                };
                let (pcol, pname) = args[0];
                let gi = self.groups.len();
                self.groups.push(Group {
                    kind,
                    parent: usize::MAX,
                    members: Vec::new(),
                });
                self.pending_parents.push((pname.to_string(), line, pcol));
                self.group_lines.push((line, kcol));
                for &(mcol, mname) in &args[1..] {
                    let m = self.declare(
                        line,
                        mcol,
                        mname,
                        Relation::Grouped {
                            parent: usize::MAX,
                            group: gi,
                        },
                    )?;
                    self.groups[gi].members.push(m);
                }
            }
            "requires" | "excludes" => {
                let (scol, source, tcol, target) =
                    self.two_args(line, kcol, "<feature> <feature>", args)?;
                let source = *self
                    .index
                    .get(source)
                    .ok_or_else(|| ParseError::UnknownFeature {
                        line,
                        col: scol,
                        name: source.to_string(),
                    })?;
                let target = *self
                    .index
                    .get(target)
                    .ok_or_else(|| ParseError::UnknownFeature {
                        line,
                        col: tcol,
                        name: target.to_string(),
                    })?;
                if source == target {
                    return Err(ParseError::Syntax {
                        line,
                        col: tcol,
                        msg: format!("constraint endpoints must differ, both are `{}`", args[0].1),
                    });
                }
                let kind = if keyword == "requires" {
                    CtcKind::Requires
                } else {
                    CtcKind::Excludes
                };
                self.constraints.push(CrossTreeConstraint {
                    kind,
                    source,
                    target,
                });
            }
            other => {
                return Err(ParseError::UnknownStatement {
                    line,
                    col: kcol,
                    word: other.to_string(),
                });
            }
        }
        Ok(())
    }

    fn one_arg<'a>(
        &self,
        line: usize,
        kcol: usize,
        usage: &str,
        args: &[(usize, &'a str)],
    ) -> Result<(usize, &'a str), ParseError> {
        if args.len() != 1 {
            return Err(ParseError::Syntax {
                line,
                col: kcol,
                msg: format!("expected `{usage}`"),
            });
        }
        Ok(args[0])
    }

    fn two_args<'a>(
        &self,
        line: usize,
        kcol: usize,
        usage: &str,
        args: &[(usize, &'a str)],
    ) -> Result<(usize, &'a str, usize, &'a str), ParseError> {
        if args.len() != 2 {
            return Err(ParseError::Syntax {
                line,
                col: kcol,
                msg: format!("expected two arguments: {usage}"),
            });
        }
        Ok((args[0].0, args[0].1, args[1].0, args[1].1))
    }

    fn bad_identifier(&self, line: usize, col: usize, name: &str) -> ParseError {
        ParseError::Syntax {
            line,
            col,
            msg: format!(
                "`{name}` is not a valid identifier (letters, digits, `_`; must not start with a digit)"
            ),
        }
    }

    fn declare(
        &mut self,
        line: usize,
        col: usize,
        name: &str,
        relation: Relation,
    ) -> Result<usize, ParseError> {
        if !valid_identifier(name) {
            return Err(self.bad_identifier(line, col, name));
        }
        if self.index.contains_key(name) {
            return Err(ParseError::DuplicateFeature {
                line,
                col,
                name: name.to_string(),
            });
        }
        let id = self.features.len();
        self.features.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.relations.push(relation);
        Ok(id)
    }

    /// Deferred group parents are the only way to close a parent cycle; walk
    /// every parent chain and make sure it reaches the root.
    fn check_acyclic(&self) -> Result<(), ParseError> {
        let n = self.features.len();
        for start in 0..n {
            let mut current = start;
            for _ in 0..=n {
                match self.relations[current].parent() {
                    None => break,
                    Some(p) => {
                        if p == start {
                            let (line, col) = self.cycle_location(start);
                            return Err(ParseError::Syntax {
                                line,
                                col,
                                msg: format!(
                                    "feature `{}` is its own ancestor",
                                    self.features[start]
                                ),
                            });
                        }
                        current = p;
                    }
                }
            }
        }
        Ok(())
    }

    fn cycle_location(&self, feature: usize) -> (usize, usize) {
        if let Relation::Grouped { group, .. } = self.relations[feature] {
            return self.group_lines[group];
        }
        (0, 0)
    }
}
