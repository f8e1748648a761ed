//! Synthetic dataset and query generator.
//!
//! Queries come in four shapes: star (patterns sharing one subject
//! variable), linear (each pattern's object is the next pattern's subject),
//! snowflake (stars joined through linear links), and complex (a mixture
//! with more variables). Every query is sampled from the generated graph
//! itself, so it always has at least one answer, and everything is a pure
//! function of the seed.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use crate::ntriples::write_ntriples;
use crate::rng::SplitMix64;
use crate::sparql::{BgpQuery, PatternTerm, Projection, TriplePattern, Variable};
use crate::term::{Dictionary, Term, TermId, Triple};

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum QueryShape {
    Star,
    Linear,
    Snowflake,
    Complex,
}

impl QueryShape {
    pub const ALL: [QueryShape; 4] = [
        QueryShape::Complex,
        QueryShape::Snowflake,
        QueryShape::Linear,
        QueryShape::Star,
    ];

    /// One-letter tag used in query ids and benchmark reports.
    pub fn tag(self) -> char {
        match self {
            QueryShape::Complex => 'C',
            QueryShape::Snowflake => 'F',
            QueryShape::Linear => 'L',
            QueryShape::Star => 'S',
        }
    }

    pub fn parse(s: &str) -> Option<QueryShape> {
        match s.to_ascii_lowercase().as_str() {
            "star" => Some(QueryShape::Star),
            "linear" => Some(QueryShape::Linear),
            "snowflake" => Some(QueryShape::Snowflake),
            "complex" => Some(QueryShape::Complex),
            _ => None,
        }
    }
}

impl fmt::Display for QueryShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            QueryShape::Star => "star",
            QueryShape::Linear => "linear",
            QueryShape::Snowflake => "snowflake",
            QueryShape::Complex => "complex",
        })
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub shape: QueryShape,
    pub subjects: usize,
    pub predicates: usize,
    pub seed: u64,
    /// Queries to emit per shape.
    pub queries: usize,
    /// Fixed pattern count for star queries; `None` cycles through 2..=5.
    pub star_arity: Option<usize>,
}

impl GeneratorConfig {
    pub fn new(
        shape: QueryShape,
        subjects: usize,
        predicates: usize,
        seed: u64,
    ) -> GeneratorConfig {
        GeneratorConfig {
            shape,
            subjects,
            predicates,
            seed,
            queries: 10,
            star_arity: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedQuery {
    pub id: String,
    pub shape: QueryShape,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Workload {
    pub triples: Vec<Triple>,
    pub dict: Dictionary,
    pub queries: Vec<GeneratedQuery>,
}

impl Workload {
    pub fn ntriples(&self) -> String {
        write_ntriples(&self.triples, &self.dict)
    }
}

/// Write `data.nt` plus one `queries/<id>.rq` file per query.
pub fn write_to_dir(workload: &Workload, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir.join("queries"))?;
    fs::write(dir.join("data.nt"), workload.ntriples())?;
    for q in &workload.queries {
        fs::write(dir.join("queries").join(format!("{}.rq", q.id)), &q.text)?;
    }
    Ok(())
}

/// Generate a dataset plus queries of the configured shape.
///
/// The dataset depends only on `(subjects, predicates, seed)`, never on the
/// shape, so workloads of different shapes over the same seed share one
/// graph.
pub fn generate(config: &GeneratorConfig) -> Workload {
    let mut rng = SplitMix64::new(config.seed);
    let graph = GraphData::generate(&mut rng, config.subjects, config.predicates);
    let queries = generate_queries(
        &mut rng,
        &graph,
        config.shape,
        config.queries,
        config.star_arity,
    );
    Workload {
        triples: graph.triples,
        dict: graph.dict,
        queries,
    }
}

/// One dataset with `per_shape` queries of every shape (ids C1.., F1..,
/// L1.., S1..). Shape order is fixed so the output is reproducible.
pub fn generate_mixed_shapes(
    subjects: usize,
    predicates: usize,
    seed: u64,
    per_shape: usize,
) -> Workload {
    let mut rng = SplitMix64::new(seed);
    let graph = GraphData::generate(&mut rng, subjects, predicates);
    let mut queries = Vec::new();
    for shape in QueryShape::ALL {
        queries.extend(generate_queries(&mut rng, &graph, shape, per_shape, None));
    }
    Workload {
        triples: graph.triples,
        dict: graph.dict,
        queries,
    }
}

/// The generated graph plus the adjacency view queries are sampled from.
struct GraphData {
    triples: Vec<Triple>,
    dict: Dictionary,
    entities: Vec<TermId>,
    /// subject entity index -> (predicate index, object) edges
    adjacency: Vec<Vec<(usize, TermId)>>,
    /// object id -> entity index, for chain walks
    entity_of: HashMap<TermId, usize>,
    predicates: Vec<TermId>,
}

impl GraphData {
    fn generate(rng: &mut SplitMix64, subjects: usize, predicates: usize) -> GraphData {
        let subjects = subjects.max(1);
        let n_predicates = predicates.max(1);
        let mut dict = Dictionary::new();

        let entities: Vec<TermId> = (0..subjects)
            .map(|i| dict.intern(Term::iri(format!("http://ex.org/e{i}"))))
            .collect();
        let predicate_ids: Vec<TermId> = (0..n_predicates)
            .map(|j| dict.intern(Term::iri(format!("http://ex.org/p{j}"))))
            .collect();
        let literal_pool: Vec<TermId> = (0..(subjects / 4).max(8))
            .map(|i| {
                let term = match i % 5 {
                    0 => Term::lang_literal(format!("label {i}"), "en"),
                    1 => Term::typed_literal(
                        i.to_string(),
                        "http://www.w3.org/2001/XMLSchema#integer",
                    ),
                    _ => Term::literal(format!("value-{i}")),
                };
                dict.intern(term)
            })
            .collect();

        let mut entity_of = HashMap::new();
        for (i, &id) in entities.iter().enumerate() {
            entity_of.insert(id, i);
        }

        let mut triples = Vec::new();
        let mut adjacency: Vec<Vec<(usize, TermId)>> = vec![Vec::new(); subjects];
        for (i, &subject) in entities.iter().enumerate() {
            let degree = (2 + rng.below(4)).min(n_predicates);
            let mut chosen: Vec<usize> = Vec::with_capacity(degree);
            while chosen.len() < degree {
                let p = rng.below(n_predicates);
                if !chosen.contains(&p) {
                    chosen.push(p);
                }
            }
            for p in chosen {
                let object = if rng.chance(55) {
                    entities[rng.below(subjects)]
                } else {
                    literal_pool[rng.below(literal_pool.len())]
                };
                let triple = Triple::new(subject, predicate_ids[p], object);
                triples.push(triple);
                adjacency[i].push((p, object));
                if rng.chance(12) {
                    // multi-valued: a second object under the same predicate
                    let extra = if rng.chance(55) {
                        entities[rng.below(subjects)]
                    } else {
                        literal_pool[rng.below(literal_pool.len())]
                    };
                    triples.push(Triple::new(subject, predicate_ids[p], extra));
                    adjacency[i].push((p, extra));
                }
                if rng.chance(4) {
                    triples.push(triple); // exact duplicate, exercises bags
                }
            }
        }

        GraphData {
            triples,
            dict,
            entities,
            adjacency,
            entity_of,
            predicates: predicate_ids,
        }
    }

    /// Distinct predicate indexes of one entity's outgoing edges.
    fn distinct_preds(&self, entity: usize) -> Vec<usize> {
        let mut preds: Vec<usize> = self.adjacency[entity].iter().map(|&(p, _)| p).collect();
        preds.sort_unstable();
        preds.dedup();
        preds
    }

    /// First entity at or after a random start with at least `k` distinct
    /// predicates; falls back to the best available.
    fn entity_with_degree(&self, rng: &mut SplitMix64, k: usize) -> (usize, usize) {
        let n = self.entities.len();
        let start = rng.below(n);
        let mut best = (start, 0);
        for j in 0..n {
            let e = (start + j) % n;
            let d = self.distinct_preds(e).len();
            if d >= k {
                return (e, d);
            }
            if d > best.1 {
                best = (e, d);
            }
        }
        best
    }

    /// An outgoing edge of `entity` whose object is an entity, if any.
    fn entity_edge(&self, rng: &mut SplitMix64, entity: usize) -> Option<(usize, usize)> {
        let edges: Vec<(usize, usize)> = self.adjacency[entity]
            .iter()
            .filter_map(|&(p, o)| self.entity_of.get(&o).map(|&e| (p, e)))
            .collect();
        if edges.is_empty() {
            None
        } else {
            Some(edges[rng.below(edges.len())])
        }
    }

    fn resolve(&self, id: TermId) -> Term {
        self.dict.resolve(id).clone()
    }
}

fn var(name: impl Into<String>) -> Variable {
    Variable::new(name).expect("generated variable names are valid")
}

fn generate_queries(
    rng: &mut SplitMix64,
    graph: &GraphData,
    shape: QueryShape,
    count: usize,
    star_arity: Option<usize>,
) -> Vec<GeneratedQuery> {
    (0..count)
        .map(|i| {
            let query = match shape {
                QueryShape::Star => {
                    let k = star_arity.unwrap_or(2 + i % 4);
                    star_query(rng, graph, k, "s", "o")
                }
                QueryShape::Linear => linear_query(rng, graph, 2 + i % 3),
                QueryShape::Snowflake => snowflake_query(rng, graph),
                QueryShape::Complex => complex_query(rng, graph),
            };
            GeneratedQuery {
                id: format!("{}{}", shape.tag(), i + 1),
                shape,
                text: query.to_string(),
            }
        })
        .collect()
}

/// `k` patterns sharing the subject variable, sampled from one entity's
/// actual edges. Roughly a third of the queries constrain one object to the
/// value found in the data.
fn star_query(
    rng: &mut SplitMix64,
    graph: &GraphData,
    k: usize,
    subject_name: &str,
    object_prefix: &str,
) -> BgpQuery {
    let (patterns, _) = star_patterns(rng, graph, k, subject_name, object_prefix, None);
    finish_query(rng, patterns)
}

/// Build star patterns around a concrete entity (sampled when `pin` is
/// None). Returns the patterns and the entity they are anchored on.
fn star_patterns(
    rng: &mut SplitMix64,
    graph: &GraphData,
    k: usize,
    subject_name: &str,
    object_prefix: &str,
    pin: Option<usize>,
) -> (Vec<TriplePattern>, usize) {
    let (entity, available) = match pin {
        Some(e) => (e, graph.distinct_preds(e).len()),
        None => graph.entity_with_degree(rng, k),
    };
    let k = k.min(available).max(1);
    let preds = graph.distinct_preds(entity);
    // pick k distinct predicates the entity actually has
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    while chosen.len() < k {
        let p = preds[rng.below(preds.len())];
        if !chosen.contains(&p) {
            chosen.push(p);
        }
    }
    let constant_slot = if rng.chance(35) {
        Some(rng.below(k))
    } else {
        None
    };

    let subject_var = var(subject_name);
    let patterns = chosen
        .iter()
        .enumerate()
        .map(|(slot, &p)| {
            let object = if constant_slot == Some(slot) {
                // bind to a value this entity really has for p
                let values: Vec<TermId> = graph.adjacency[entity]
                    .iter()
                    .filter(|&&(ep, _)| ep == p)
                    .map(|&(_, o)| o)
                    .collect();
                PatternTerm::Const(graph.resolve(values[rng.below(values.len())]))
            } else {
                PatternTerm::Var(var(format!("{object_prefix}{}", slot + 1)))
            };
            TriplePattern {
                subject: PatternTerm::Var(subject_var.clone()),
                predicate: graph.resolve(graph.predicates[p]),
                object,
            }
        })
        .collect();
    (patterns, entity)
}

/// A chain of `len` patterns where each object is the next subject, walked
/// along actual entity-to-entity edges.
fn linear_query(rng: &mut SplitMix64, graph: &GraphData, len: usize) -> BgpQuery {
    let (patterns, _) = chain_patterns(rng, graph, len, 0, None);
    finish_query(rng, patterns)
}

/// Walk `len` hops from a start entity (random when None). Variable names
/// are x{offset}, x{offset+1}, ... Returns the patterns and the final
/// entity reached.
fn chain_patterns(
    rng: &mut SplitMix64,
    graph: &GraphData,
    len: usize,
    offset: usize,
    start: Option<usize>,
) -> (Vec<TriplePattern>, usize) {
    let n = graph.entities.len();
    // find a start that can sustain the walk, shrinking if the graph can't
    for attempt in 0..12 {
        let s = match start {
            Some(s) if attempt == 0 => s,
            _ => rng.below(n),
        };
        let mut current = s;
        let mut hops = Vec::new();
        for _ in 0..len {
            match graph.entity_edge(rng, current) {
                Some((p, next)) => {
                    hops.push((current, p, next));
                    current = next;
                }
                None => break,
            }
        }
        if hops.len() == len || (attempt == 11 && !hops.is_empty()) {
            let last_entity = hops.last().map(|&(_, _, next)| next).unwrap_or(s);
            let constant_head = start.is_none() && rng.chance(20);
            let constant_tail = rng.chance(30);
            let patterns = hops
                .iter()
                .enumerate()
                .map(|(i, &(from, p, to))| {
                    let subject = if i == 0 && constant_head {
                        PatternTerm::Const(graph.resolve(graph.entities[from]))
                    } else {
                        PatternTerm::Var(var(format!("x{}", offset + i)))
                    };
                    let object = if i == hops.len() - 1 && constant_tail {
                        PatternTerm::Const(graph.resolve(graph.entities[to]))
                    } else {
                        PatternTerm::Var(var(format!("x{}", offset + i + 1)))
                    };
                    TriplePattern {
                        subject,
                        predicate: graph.resolve(graph.predicates[p]),
                        object,
                    }
                })
                .collect();
            return (patterns, last_entity);
        }
    }
    // degenerate graph: fall back to a single unconstrained pattern on some
    // edge that exists
    let e = (0..n)
        .find(|&e| !graph.adjacency[e].is_empty())
        .unwrap_or(0);
    let p = graph.adjacency[e].first().map(|&(p, _)| p).unwrap_or(0);
    (
        vec![TriplePattern {
            subject: PatternTerm::Var(var(format!("x{offset}"))),
            predicate: graph.resolve(graph.predicates[p]),
            object: PatternTerm::Var(var(format!("x{}", offset + 1))),
        }],
        e,
    )
}

/// Two stars joined by a bridge edge: a star on ?s, one hop to ?t, and a
/// star on ?t.
fn snowflake_query(rng: &mut SplitMix64, graph: &GraphData) -> BgpQuery {
    let n = graph.entities.len();
    // find an entity with a bridge to another entity that has edges of its own
    let mut head = rng.below(n);
    let mut bridge = None;
    for j in 0..n {
        let e = (head + j) % n;
        if let Some((p, target)) = graph.entity_edge(rng, e) {
            if !graph.adjacency[target].is_empty() {
                head = e;
                bridge = Some((p, target));
                break;
            }
        }
    }
    let Some((bridge_pred, target)) = bridge else {
        // no entity-to-entity edge anywhere; degrade to a star
        return star_query(rng, graph, 2, "s", "o");
    };

    let (mut patterns, _) = star_patterns(rng, graph, 2, "s", "o", Some(head));
    patterns.push(TriplePattern {
        subject: PatternTerm::Var(var("s")),
        predicate: graph.resolve(graph.predicates[bridge_pred]),
        object: PatternTerm::Var(var("t")),
    });
    let (tail, _) = star_patterns(rng, graph, 2, "t", "u", Some(target));
    patterns.extend(tail);
    finish_query(rng, patterns)
}

/// A snowflake extended with an extra chain and, when the graph allows it, a
/// third star — more patterns and more variables than the other shapes.
fn complex_query(rng: &mut SplitMix64, graph: &GraphData) -> BgpQuery {
    let n = graph.entities.len();
    let mut head = rng.below(n);
    let mut bridge = None;
    for j in 0..n {
        let e = (head + j) % n;
        if let Some((p, target)) = graph.entity_edge(rng, e) {
            if !graph.adjacency[target].is_empty() {
                head = e;
                bridge = Some((p, target));
                break;
            }
        }
    }
    let Some((bridge_pred, target)) = bridge else {
        return star_query(rng, graph, 3, "s", "o");
    };

    let (mut patterns, _) = star_patterns(rng, graph, 3, "s", "o", Some(head));
    patterns.push(TriplePattern {
        subject: PatternTerm::Var(var("s")),
        predicate: graph.resolve(graph.predicates[bridge_pred]),
        object: PatternTerm::Var(var("t")),
    });
    let (tail, _) = star_patterns(rng, graph, 2, "t", "u", Some(target));
    patterns.extend(tail);

    // extend with a chain from ?t when possible
    if let Some((p, next)) = graph.entity_edge(rng, target) {
        patterns.push(TriplePattern {
            subject: PatternTerm::Var(var("t")),
            predicate: graph.resolve(graph.predicates[p]),
            object: PatternTerm::Var(var("z0")),
        });
        if !graph.adjacency[next].is_empty() && rng.chance(60) {
            let (extra, _) = star_patterns(rng, graph, 2, "z0", "z", Some(next));
            patterns.extend(extra);
        }
    }
    finish_query(rng, patterns)
}

/// Wrap patterns into a query: usually `SELECT *`, sometimes an explicit
/// subset of the variables, occasionally DISTINCT.
fn finish_query(rng: &mut SplitMix64, patterns: Vec<TriplePattern>) -> BgpQuery {
    let mut query = BgpQuery {
        projection: Projection::All,
        distinct: rng.chance(10),
        patterns,
    };
    if rng.chance(25) {
        let vars = query.variables();
        let keep = 1 + rng.below(vars.len());
        query.projection = Projection::Vars(vars.into_iter().take(keep).collect());
    }
    query
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::nested_loop_eval;
    use crate::sparql::parse_query;

    #[test]
    fn star_queries_share_one_subject_variable() {
        let mut config = GeneratorConfig::new(QueryShape::Star, 60, 8, 11);
        config.star_arity = Some(4);
        let w = generate(&config);
        assert_eq!(w.queries.len(), 10);
        for q in &w.queries {
            let parsed = parse_query(&q.text).unwrap();
            assert_eq!(parsed.patterns.len(), 4, "{}", q.text);
            let subjects: Vec<_> = parsed.patterns.iter().map(|p| p.subject.clone()).collect();
            assert!(
                subjects.windows(2).all(|w| w[0] == w[1]),
                "star must share its subject: {}",
                q.text
            );
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let config = GeneratorConfig::new(QueryShape::Snowflake, 40, 6, 99);
        let a = generate(&config);
        let b = generate(&config);
        assert_eq!(a.ntriples(), b.ntriples());
        assert_eq!(a.queries.len(), b.queries.len());
        for (qa, qb) in a.queries.iter().zip(&b.queries) {
            assert_eq!(qa.id, qb.id);
            assert_eq!(qa.text, qb.text);
        }
    }

    #[test]
    fn dataset_is_shape_independent() {
        let star = generate(&GeneratorConfig::new(QueryShape::Star, 40, 6, 7));
        let linear = generate(&GeneratorConfig::new(QueryShape::Linear, 40, 6, 7));
        assert_eq!(star.ntriples(), linear.ntriples());
    }

    #[test]
    fn every_query_has_a_witness() {
        for shape in QueryShape::ALL {
            let w = generate(&GeneratorConfig::new(shape, 50, 8, 123));
            for q in &w.queries {
                let parsed = parse_query(&q.text).unwrap();
                let result = nested_loop_eval(&parsed, &w.triples, &w.dict);
                assert!(!result.is_empty(), "{} returned no rows:\n{}", q.id, q.text);
            }
        }
    }

    #[test]
    fn linear_queries_chain_subjects_to_objects() {
        let w = generate(&GeneratorConfig::new(QueryShape::Linear, 50, 8, 5));
        for q in &w.queries {
            let parsed = parse_query(&q.text).unwrap();
            for pair in parsed.patterns.windows(2) {
                // the object expression of one hop is the subject of the next
                // (constant tails only occur on the last pattern)
                assert_eq!(
                    pair[0].object, pair[1].subject,
                    "chain break in {}:\n{}",
                    q.id, q.text
                );
            }
        }
    }

    #[test]
    fn mixed_shape_workload_covers_all_tags() {
        let w = generate_mixed_shapes(50, 8, 77, 3);
        assert_eq!(w.queries.len(), 12);
        let mut tags: Vec<char> = w.queries.iter().map(|q| q.shape.tag()).collect();
        tags.sort_unstable();
        tags.dedup();
        assert_eq!(tags, vec!['C', 'F', 'L', 'S']);
    }

    #[test]
    fn written_files_parse_back() {
        let w = generate(&GeneratorConfig::new(QueryShape::Complex, 30, 6, 3));
        let tmp = tempfile::tempdir().unwrap();
        write_to_dir(&w, tmp.path()).unwrap();
        let text = std::fs::read_to_string(tmp.path().join("data.nt")).unwrap();
        let (triples, _) = crate::ntriples::parse_ntriples_str(&text).unwrap();
        assert_eq!(triples.len(), w.triples.len());
        for q in &w.queries {
            let file = tmp.path().join("queries").join(format!("{}.rq", q.id));
            let text = std::fs::read_to_string(file).unwrap();
            parse_query(&text).unwrap();
        }
    }

    #[test]
    fn tiny_graph_does_not_panic() {
        for shape in QueryShape::ALL {
            let w = generate(&GeneratorConfig::new(shape, 1, 1, 1));
            assert!(!w.triples.is_empty());
            for q in &w.queries {
                parse_query(&q.text).unwrap();
            }
        }
    }
}
