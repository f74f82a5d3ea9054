//! From-scratch Random Forest classifier: CART trees on Gini impurity,
//! bootstrap aggregation with deterministic per-tree seeding, stratified
//! splitting, evaluation, and plain-text model persistence.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::types::{PostureLabel, CLASS_COUNT};
use crate::Result;

/// Training hyperparameters. Each tree draws its feature subsets and
/// bootstrap rows from a generator seeded by `(seed, tree index)`, so
/// training order cannot affect the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows trees until purity or `min_samples_split`.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            seed: 42,
        }
    }
}

impl ForestParams {
    fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Config {
                field: "n_trees".into(),
                message: "must be at least 1".into(),
            });
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config {
                field: "min_samples_split".into(),
                message: "must be at least 2".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [usize; CLASS_COUNT],
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// The modal class of the leaf reached by `x` (row-vote of this tree).
    fn vote(&self, x: &[f64]) -> PostureLabel {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *threshold { *left } else { *right };
                }
                Node::Leaf { counts } => return modal_class(counts),
            }
        }
    }
}

/// A trained ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedForest {
    trees: Vec<Tree>,
    classes: Vec<PostureLabel>,
    params: ForestParams,
    n_features: usize,
}

/// The winning split of a node scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Gini impurity `1 − Σ pᵢ²` from integer class counts.
pub fn gini(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Domain {
            message: "gini of an empty node".into(),
        });
    }
    Ok(gini_of(counts, total))
}

fn gini_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    let mut sum_sq = 0.0;
    for &c in counts {
        let p = c as f64 / n;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

fn modal_class(counts: &[usize; CLASS_COUNT]) -> PostureLabel {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    PostureLabel::from_index(best).expect("class index in range")
}

/// Scan every candidate threshold (midpoints between consecutive distinct
/// sorted values) of every feature in `feature_subset` and return the split
/// with the largest weighted Gini decrease, or `None` when no candidate
/// decreases impurity. Ties go to the lowest feature index, then the lowest
/// threshold. Midpoints that round onto a neighbouring value are skipped so
/// the `x < threshold` predicate always reproduces the scanned partition.
pub fn best_split(
    features: &[Vec<f64>],
    labels: &[PostureLabel],
    feature_subset: &[usize],
) -> Option<SplitCandidate> {
    let indices: Vec<usize> = (0..features.len()).collect();
    best_split_indexed(features, labels, &indices, feature_subset)
}

fn best_split_indexed(
    features: &[Vec<f64>],
    labels: &[PostureLabel],
    indices: &[usize],
    feature_subset: &[usize],
) -> Option<SplitCandidate> {
    let n = indices.len();
    if n < 2 || feature_subset.is_empty() {
        return None;
    }
    let mut parent_counts = [0usize; CLASS_COUNT];
    for &i in indices {
        parent_counts[labels[i].index()] += 1;
    }
    let parent_gini = gini_of(&parent_counts, n);

    let mut subset: Vec<usize> = feature_subset.to_vec();
    subset.sort_unstable();
    subset.dedup();

    let mut best: Option<SplitCandidate> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &feature in &subset {
        pairs.clear();
        pairs.extend(indices.iter().map(|&i| (features[i][feature], labels[i].index())));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_counts = [0usize; CLASS_COUNT];
        for split_at in 1..n {
            left_counts[pairs[split_at - 1].1] += 1;
            let (prev, next) = (pairs[split_at - 1].0, pairs[split_at].0);
            if !(prev < next) {
                continue;
            }
            let threshold = (prev + next) / 2.0;
            if !(prev < threshold && threshold < next) {
                continue;
            }
            let mut right_counts = [0usize; CLASS_COUNT];
            for c in 0..CLASS_COUNT {
                right_counts[c] = parent_counts[c] - left_counts[c];
            }
            let left_total = split_at;
            let right_total = n - split_at;
            let decrease = parent_gini
                - (left_total as f64 / n as f64) * gini_of(&left_counts, left_total)
                - (right_total as f64 / n as f64) * gini_of(&right_counts, right_total);
            let better = decrease > 0.0
                && best.is_none_or(|b| decrease > b.decrease);
            if better {
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    best
}

fn class_counts(labels: &[PostureLabel], indices: &[usize]) -> [usize; CLASS_COUNT] {
    let mut counts = [0usize; CLASS_COUNT];
    for &i in indices {
        counts[labels[i].index()] += 1;
    }
    counts
}

/// Everything constant across one tree's recursion.
struct GrowContext<'a> {
    features: &'a [Vec<f64>],
    labels: &'a [PostureLabel],
    params: &'a ForestParams,
    n_features: usize,
    features_per_split: usize,
}

fn grow(
    nodes: &mut Vec<Node>,
    ctx: &GrowContext<'_>,
    indices: &[usize],
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let counts = class_counts(ctx.labels, indices);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_capped = ctx.params.max_depth.is_some_and(|m| depth >= m);
    if pure || indices.len() < ctx.params.min_samples_split || depth_capped {
        nodes.push(Node::Leaf { counts });
        return nodes.len() - 1;
    }
    let subset = rand::seq::index::sample(rng, ctx.n_features, ctx.features_per_split).into_vec();
    let Some(split) = best_split_indexed(ctx.features, ctx.labels, indices, &subset) else {
        nodes.push(Node::Leaf { counts });
        return nodes.len() - 1;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| ctx.features[i][split.feature] < split.threshold);
    let me = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let l = grow(nodes, ctx, &left_rows, depth + 1, rng);
    let r = grow(nodes, ctx, &right_rows, depth + 1, rng);
    if let Node::Split { left, right, .. } = &mut nodes[me] {
        *left = l;
        *right = r;
    }
    me
}

/// Grow one unbagged tree over the given rows, so tests can check that a
/// deep tree with every feature available memorizes distinct rows.
#[cfg(test)]
fn grow_tree(
    features: &[Vec<f64>],
    labels: &[PostureLabel],
    indices: &[usize],
    params: &ForestParams,
    features_per_split: usize,
    rng: &mut ChaCha8Rng,
) -> TrainedForest {
    let n_features = features[0].len();
    let ctx = GrowContext {
        features,
        labels,
        params,
        n_features,
        features_per_split,
    };
    let mut nodes = Vec::new();
    grow(&mut nodes, &ctx, indices, 0, rng);
    TrainedForest {
        trees: vec![Tree { nodes }],
        classes: PostureLabel::ALL.to_vec(),
        params: ForestParams {
            n_trees: 1,
            ..*params
        },
        n_features,
    }
}

fn validate_training_data(features: &[Vec<f64>], labels: &[PostureLabel]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::Shape {
            expected: features.len(),
            got: labels.len(),
        });
    }
    if features.len() < 2 {
        return Err(Error::InvalidArgument {
            name: "features",
            message: format!("need at least 2 training rows, got {}", features.len()),
        });
    }
    let width = features[0].len();
    if width == 0 {
        return Err(Error::InvalidArgument {
            name: "features",
            message: "need at least one feature column".into(),
        });
    }
    for (i, row) in features.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Shape {
                expected: width,
                got: row.len(),
            });
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain {
                message: format!("non-finite feature value {v} in row {i}"),
            });
        }
    }
    Ok(width)
}

/// Train a forest: per tree, bootstrap `n` rows with replacement from a
/// generator seeded by `(seed, tree index)` and grow a CART with a fresh
/// random feature subset of size `floor(sqrt(d))` at every node.
pub fn fit(
    features: &[Vec<f64>],
    labels: &[PostureLabel],
    params: &ForestParams,
) -> Result<TrainedForest> {
    params.validate()?;
    let width = validate_training_data(features, labels)?;
    let features_per_split = ((width as f64).sqrt().floor() as usize).clamp(1, width);
    let n = features.len();
    let ctx = GrowContext {
        features,
        labels,
        params,
        n_features: width,
        features_per_split,
    };

    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut nodes = Vec::new();
            grow(&mut nodes, &ctx, &sample, 0, &mut rng);
            Tree { nodes }
        })
        .collect();

    Ok(TrainedForest {
        trees,
        classes: PostureLabel::ALL.to_vec(),
        params: *params,
        n_features: width,
    })
}

impl TrainedForest {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn classes(&self) -> &[PostureLabel] {
        &self.classes
    }

    fn check_width(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Majority vote over trees; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<PostureLabel> {
        self.check_width(x)?;
        let mut votes = [0usize; CLASS_COUNT];
        for tree in &self.trees {
            votes[tree.vote(x).index()] += 1;
        }
        Ok(modal_class(&votes))
    }

    /// Per-class vote fractions; sums to 1.
    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; CLASS_COUNT]> {
        self.check_width(x)?;
        let mut votes = [0usize; CLASS_COUNT];
        for tree in &self.trees {
            votes[tree.vote(x).index()] += 1;
        }
        let total = self.trees.len() as f64;
        let mut fractions = [0.0; CLASS_COUNT];
        for (f, v) in fractions.iter_mut().zip(votes) {
            *f = v as f64 / total;
        }
        Ok(fractions)
    }
}

/// Shuffle each class separately with a seeded generator and put the first
/// `floor(ratio · n_c)` rows of each into the training set, the rest into
/// the test set. Returns sorted row-index vectors partitioning the input.
pub fn stratified_split(
    labels: &[PostureLabel],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument {
            name: "ratio",
            message: format!("must be strictly between 0 and 1, got {ratio}"),
        });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); CLASS_COUNT];
    for (i, label) in labels.iter().enumerate() {
        by_class[label.index()].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, rows) in by_class.iter_mut().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < 2 {
            return Err(Error::Stratification {
                class: PostureLabel::from_index(c).expect("class index").to_string(),
            });
        }
        rows.shuffle(&mut rng);
        let take = (ratio * rows.len() as f64).floor() as usize;
        train.extend_from_slice(&rows[..take]);
        test.extend_from_slice(&rows[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Per-class evaluation metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Confusion matrix plus derived metrics for one test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub classes: Vec<String>,
    /// Counts; rows = true class, columns = predicted class.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Predict every test row and tabulate the confusion matrix, accuracy,
/// and per-class precision/recall/F1.
pub fn evaluate(
    forest: &TrainedForest,
    features: &[Vec<f64>],
    labels: &[PostureLabel],
) -> Result<EvaluationReport> {
    if features.len() != labels.len() {
        return Err(Error::Shape {
            expected: features.len(),
            got: labels.len(),
        });
    }
    if features.is_empty() {
        return Err(Error::InvalidArgument {
            name: "features",
            message: "test set is empty".into(),
        });
    }
    let mut confusion = vec![vec![0usize; CLASS_COUNT]; CLASS_COUNT];
    for (x, label) in features.iter().zip(labels) {
        let predicted = forest.predict(x)?;
        confusion[label.index()][predicted.index()] += 1;
    }
    let total: usize = confusion.iter().flatten().sum();
    let trace: usize = (0..CLASS_COUNT).map(|c| confusion[c][c]).sum();
    let per_class = (0..CLASS_COUNT)
        .map(|c| {
            let row: usize = confusion[c].iter().sum();
            let column: usize = confusion.iter().map(|r| r[c]).sum();
            let hit = confusion[c][c];
            let precision = if column > 0 { hit as f64 / column as f64 } else { 0.0 };
            let recall = if row > 0 { hit as f64 / row as f64 } else { 0.0 };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                class: PostureLabel::from_index(c).expect("class index").to_string(),
                precision,
                recall,
                f1,
                support: row,
            }
        })
        .collect();
    Ok(EvaluationReport {
        classes: PostureLabel::ALL.iter().map(|c| c.to_string()).collect(),
        confusion,
        accuracy: trace as f64 / total as f64,
        per_class,
    })
}

impl EvaluationReport {
    /// Human-readable summary: accuracy, per-class metrics, confusion matrix.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("accuracy\t{:.6}\n\n", self.accuracy));
        out.push_str("class\tprecision\trecall\tf1\tsupport\n");
        for m in &self.per_class {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\n",
                m.class, m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str("\nconfusion (rows = true, columns = predicted)\n");
        out.push('\t');
        out.push_str(&self.classes.join("\t"));
        out.push('\n');
        for (name, row) in self.classes.iter().zip(&self.confusion) {
            out.push_str(name);
            for count in row {
                out.push_str(&format!("\t{count}"));
            }
            out.push('\n');
        }
        out
    }

    /// Confusion matrix as CSV (first column = true class).
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("class,");
        out.push_str(&self.classes.join(","));
        out.push('\n');
        for (name, row) in self.classes.iter().zip(&self.confusion) {
            out.push_str(name);
            for count in row {
                out.push_str(&format!(",{count}"));
            }
            out.push('\n');
        }
        out
    }

    /// Per-class metrics as CSV.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1,support\n");
        for m in &self.per_class {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{}\n",
                m.class, m.precision, m.recall, m.f1, m.support
            ));
        }
        out
    }
}

const FOREST_MAGIC: &str = "neckpose-forest v1";

/// Serialize a forest as versioned plain text. Thresholds print in the
/// shortest form that parses back to the identical value, so
/// save → load → save is byte-identical.
pub fn save_forest(forest: &TrainedForest) -> String {
    let mut out = String::new();
    out.push_str(FOREST_MAGIC);
    out.push('\n');
    out.push_str("classes");
    for c in &forest.classes {
        out.push_str(&format!(" {c}"));
    }
    out.push('\n');
    out.push_str(&format!("n_features {}\n", forest.n_features));
    out.push_str(&format!("n_trees {}\n", forest.params.n_trees));
    match forest.params.max_depth {
        Some(d) => out.push_str(&format!("max_depth {d}\n")),
        None => out.push_str("max_depth none\n"),
    }
    out.push_str(&format!(
        "min_samples_split {}\n",
        forest.params.min_samples_split
    ));
    out.push_str(&format!("seed {}\n", forest.params.seed));
    for (t, tree) in forest.trees.iter().enumerate() {
        out.push_str(&format!("tree {t} {}\n", tree.nodes.len()));
        for node in &tree.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => out.push_str(&format!("split {feature} {threshold} {left} {right}\n")),
                Node::Leaf { counts } => {
                    out.push_str("leaf");
                    for c in counts {
                        out.push_str(&format!(" {c}"));
                    }
                    out.push('\n');
                }
            }
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.iter
            .next()
            .map(|(i, line)| (i + 1, line))
            .ok_or(Error::Format {
                line: None,
                message: "unexpected end of forest file".into(),
            })
    }
}

fn parse_field<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, &'a str)> {
    let (n, line) = lines.next()?;
    let value = line.strip_prefix(key).and_then(|rest| rest.strip_prefix(' '));
    match value {
        Some(v) => Ok((n, v)),
        None => Err(Error::Format {
            line: Some(n),
            message: format!("expected `{key} …`, got `{line}`"),
        }),
    }
}

fn parse_number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

/// Parse the plain-text forest format written by [`save_forest`].
pub fn load_forest(text: &str) -> Result<TrainedForest> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
    };
    let (n, magic) = lines.next()?;
    if magic != FOREST_MAGIC {
        return Err(Error::Format {
            line: Some(n),
            message: format!("expected `{FOREST_MAGIC}`, got `{magic}`"),
        });
    }
    let (n, class_list) = parse_field(&mut lines, "classes")?;
    let classes: Vec<PostureLabel> = class_list
        .split_whitespace()
        .map(|token| {
            token.parse().map_err(|_| Error::Parse {
                line: n,
                message: format!("unknown class `{token}`"),
            })
        })
        .collect::<Result<_>>()?;
    if classes != PostureLabel::ALL {
        return Err(Error::Format {
            line: Some(n),
            message: "class list does not match the canonical label order".into(),
        });
    }
    let (n, v) = parse_field(&mut lines, "n_features")?;
    let n_features: usize = parse_number(v, n, "feature count")?;
    let (n, v) = parse_field(&mut lines, "n_trees")?;
    let n_trees: usize = parse_number(v, n, "tree count")?;
    let (n, v) = parse_field(&mut lines, "max_depth")?;
    let max_depth = if v == "none" {
        None
    } else {
        Some(parse_number(v, n, "depth")?)
    };
    let (n, v) = parse_field(&mut lines, "min_samples_split")?;
    let min_samples_split: usize = parse_number(v, n, "minimum split size")?;
    let (n, v) = parse_field(&mut lines, "seed")?;
    let seed: u64 = parse_number(v, n, "seed")?;

    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let (n, header) = parse_field(&mut lines, "tree")?;
        let mut parts = header.split_whitespace();
        let index: usize = parse_number(parts.next().unwrap_or(""), n, "tree index")?;
        let node_count: usize = parse_number(parts.next().unwrap_or(""), n, "node count")?;
        if index != t {
            return Err(Error::Format {
                line: Some(n),
                message: format!("expected tree {t}, got tree {index}"),
            });
        }
        let mut nodes = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let (n, line) = lines.next()?;
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("split") => {
                    let feature: usize =
                        parse_number(parts.next().unwrap_or(""), n, "feature index")?;
                    let threshold: f64 =
                        parse_number(parts.next().unwrap_or(""), n, "threshold")?;
                    let left: usize = parse_number(parts.next().unwrap_or(""), n, "child index")?;
                    let right: usize = parse_number(parts.next().unwrap_or(""), n, "child index")?;
                    if !threshold.is_finite() {
                        return Err(Error::Format {
                            line: Some(n),
                            message: format!("non-finite threshold {threshold}"),
                        });
                    }
                    if feature >= n_features || left >= node_count || right >= node_count {
                        return Err(Error::Format {
                            line: Some(n),
                            message: "split indices out of range".into(),
                        });
                    }
                    nodes.push(Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    });
                }
                Some("leaf") => {
                    let counts: Vec<usize> = parts
                        .map(|tok| parse_number(tok, n, "leaf count"))
                        .collect::<Result<_>>()?;
                    let counts: [usize; CLASS_COUNT] =
                        counts.try_into().map_err(|v: Vec<usize>| Error::Format {
                            line: Some(n),
                            message: format!("leaf needs {CLASS_COUNT} counts, got {}", v.len()),
                        })?;
                    if counts.iter().all(|&c| c == 0) {
                        return Err(Error::Format {
                            line: Some(n),
                            message: "leaf with no samples".into(),
                        });
                    }
                    nodes.push(Node::Leaf { counts });
                }
                _ => {
                    return Err(Error::Format {
                        line: Some(n),
                        message: format!("expected `split` or `leaf`, got `{line}`"),
                    })
                }
            }
        }
        verify_reachable(&nodes, n)?;
        trees.push(Tree { nodes });
    }
    let (n, end) = lines.next()?;
    if end != "end" {
        return Err(Error::Format {
            line: Some(n),
            message: format!("expected `end`, got `{end}`"),
        });
    }
    Ok(TrainedForest {
        trees,
        classes,
        params: ForestParams {
            n_trees,
            max_depth,
            min_samples_split,
            seed,
        },
        n_features,
    })
}

/// Every node must be reachable from the root exactly once (tree shape).
fn verify_reachable(nodes: &[Node], line: usize) -> Result<()> {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        if seen[i] {
            return Err(Error::Format {
                line: Some(line),
                message: format!("node {i} referenced twice"),
            });
        }
        seen[i] = true;
        if let Node::Split { left, right, .. } = nodes[i] {
            stack.push(left);
            stack.push(right);
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Format {
            line: Some(line),
            message: format!("node {i} unreachable from the root"),
        });
    }
    Ok(())
}
