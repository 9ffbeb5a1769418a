use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::EvalError;

/// Image id → embedding vector, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dimension: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self, EvalError> {
        let mut set = Self {
            dimension: 0,
            vectors: BTreeMap::new(),
        };
        for (id, v) in entries {
            set.insert(id, v, None)?;
        }
        Ok(set)
    }

    fn insert(&mut self, id: String, v: Vec<f64>, line: Option<usize>) -> Result<(), EvalError> {
        let at = |message: String| match line {
            Some(line) => EvalError::Parse { line, message },
            None => EvalError::Invalid(message),
        };
        if v.is_empty() {
            return Err(at(format!("embedding {id:?} has no values")));
        }
        if self.vectors.is_empty() {
            self.dimension = v.len();
        } else if v.len() != self.dimension {
            return Err(at(format!(
                "embedding {id:?} has dimension {} but earlier rows have dimension {}",
                v.len(),
                self.dimension
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(at(format!("embedding {id:?} has a non-finite value")));
        }
        if v.iter().all(|&x| x == 0.0) {
            return Err(at(format!("embedding {id:?} has zero norm")));
        }
        if self.vectors.contains_key(&id) {
            return Err(at(format!("duplicate embedding id {id:?}")));
        }
        self.vectors.insert(id, v);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&[f64], EvalError> {
        self.vectors
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| EvalError::UnknownId(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// `<image-id> v1 ... vd` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut set = Self {
            dimension: 0,
            vectors: BTreeMap::new(),
        };
        for (n, line) in data_lines(text) {
            let mut fields = line.split_whitespace();
            let id = fields.next().expect("non-empty line").to_string();
            let values = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| EvalError::Parse {
                        line: n,
                        message: format!("bad number {f:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            set.insert(id, values, Some(n))?;
        }
        if set.is_empty() {
            return Err(EvalError::Invalid("no embeddings".into()));
        }
        Ok(set)
    }

    /// Inverse of [`EmbeddingSet::parse`]; values round-trip exactly.
    pub fn format(&self) -> String {
        let mut out = String::new();
        for (id, v) in &self.vectors {
            out.push_str(id);
            for x in v {
                write!(out, " {x}").expect("string write");
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::parse(&read_text(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub id_a: String,
    pub id_b: String,
    pub same: bool,
    /// 1-based fold, when the file assigns one.
    pub fold: Option<usize>,
}

/// Labelled verification pairs; folds are either given for every pair or
/// for none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairList {
    pairs: Vec<Pair>,
}

impl PairList {
    pub fn new(pairs: Vec<Pair>) -> Result<Self, EvalError> {
        if pairs.is_empty() {
            return Err(EvalError::Invalid("pair list is empty".into()));
        }
        let with_fold = pairs.iter().filter(|p| p.fold.is_some()).count();
        if with_fold != 0 && with_fold != pairs.len() {
            return Err(EvalError::Invalid(
                "either every pair or no pair must name a fold".into(),
            ));
        }
        if pairs.iter().any(|p| p.fold == Some(0)) {
            return Err(EvalError::Invalid("folds are numbered from 1".into()));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn has_folds(&self) -> bool {
        self.pairs[0].fold.is_some()
    }

    /// `<id_a> <id_b> <same|diff> [fold]` lines.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut pairs = Vec::new();
        for (n, line) in data_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| EvalError::Parse { line: n, message };
            if !(3..=4).contains(&fields.len()) {
                return Err(err(format!(
                    "expected `id_a id_b same|diff [fold]`, got {} fields",
                    fields.len()
                )));
            }
            let same = match fields[2] {
                "same" => true,
                "diff" | "different" => false,
                other => return Err(err(format!("label {other:?} is not same or diff"))),
            };
            let fold = fields
                .get(3)
                .map(|f| {
                    f.parse::<usize>()
                        .map_err(|_| err(format!("bad fold {f:?}")))
                })
                .transpose()?;
            pairs.push(Pair {
                id_a: fields[0].to_string(),
                id_b: fields[1].to_string(),
                same,
                fold,
            });
        }
        Self::new(pairs)
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            let label = if p.same { "same" } else { "diff" };
            write!(out, "{} {} {label}", p.id_a, p.id_b).expect("string write");
            if let Some(f) = p.fold {
                write!(out, " {f}").expect("string write");
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::parse(&read_text(path)?)
    }

    /// Fail on the first id for which `exists` is false, naming it.
    pub fn check_ids(&self, mut exists: impl FnMut(&str) -> bool) -> Result<(), EvalError> {
        for p in &self.pairs {
            for id in [&p.id_a, &p.id_b] {
                if !exists(id) {
                    return Err(EvalError::UnknownId(id.clone()));
                }
            }
        }
        Ok(())
    }
}

/// The images of one subject, compared jointly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub subject: String,
    pub images: Vec<String>,
}

impl Template {
    pub fn new(subject: String, images: Vec<String>) -> Result<Self, EvalError> {
        if images.is_empty() {
            return Err(EvalError::Invalid(format!("template {subject:?} is empty")));
        }
        Ok(Self { subject, images })
    }
}

/// `<subject-id> <image-id>...` lines, keyed by subject.
pub fn parse_templates(text: &str) -> Result<BTreeMap<String, Template>, EvalError> {
    let mut out = BTreeMap::new();
    for (n, line) in data_lines(text) {
        let mut fields = line.split_whitespace().map(str::to_string);
        let subject = fields.next().expect("non-empty line");
        let t = Template::new(subject.clone(), fields.collect()).map_err(|e| EvalError::Parse {
            line: n,
            message: e.to_string(),
        })?;
        if out.insert(subject.clone(), t).is_some() {
            return Err(EvalError::Parse {
                line: n,
                message: format!("duplicate template {subject:?}"),
            });
        }
    }
    Ok(out)
}

pub fn load_templates(path: &Path) -> Result<BTreeMap<String, Template>, EvalError> {
    parse_templates(&read_text(path)?)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read_text(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_dimensions_name_both() {
        let err = EmbeddingSet::parse("a 1 2 3\nb 1 2\n")
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("dimension 2") && err.contains("dimension 3"),
            "{err}"
        );
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn embedding_validation() {
        assert!(EmbeddingSet::parse("a 0 0\n").is_err());
        assert!(EmbeddingSet::parse("a 1 x\n").is_err());
        assert!(EmbeddingSet::parse("a 1 NaN\n").is_err());
        assert!(EmbeddingSet::parse("a 1\na 2\n").is_err());
        assert!(EmbeddingSet::parse("# nothing\n").is_err());
        let s = EmbeddingSet::parse("# c\n\nb 0.1 -2e-3\na 1 2\n").unwrap();
        assert_eq!((s.len(), s.dimension()), (2, 2));
        assert_eq!(s.get("b").unwrap(), &[0.1, -2e-3]);
        assert!(matches!(s.get("zz"), Err(EvalError::UnknownId(id)) if id == "zz"));
    }

    #[test]
    fn pairs_parse_and_validate() {
        let p = PairList::parse("a b same 1\nc d diff 2\n").unwrap();
        assert!(p.has_folds());
        assert_eq!(p.pairs()[1].fold, Some(2));
        assert!(!p.pairs()[1].same);
        assert!(PairList::parse("a b same 1\nc d diff\n").is_err());
        assert!(PairList::parse("a b maybe\n").is_err());
        assert!(PairList::parse("a b same 0\n").is_err());
        assert!(PairList::parse("a b\n").is_err());
        assert!(PairList::parse("").is_err());
        let err = p.check_ids(|id| id != "c").unwrap_err().to_string();
        assert!(err.contains("\"c\""), "{err}");
    }

    #[test]
    fn templates_parse() {
        let t = parse_templates("s1 a b\ns2 c\n").unwrap();
        assert_eq!(t["s1"].images, vec!["a", "b"]);
        assert!(parse_templates("s1\n").is_err());
        assert!(parse_templates("s1 a\ns1 b\n").is_err());
    }
}
