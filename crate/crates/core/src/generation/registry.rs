use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{
    GenerationError, Generator, RetrievalBaseline, TrainingExample, TrigramBaseline,
    UniformGenerator, MODEL_MAGIC, MODEL_VERSION,
};
use super::retrieval::DEFAULT_RETRIEVAL_FLOOR;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    /// Add-k constant for count-based models.
    pub smoothing_k: f64,
    /// Uniform mixing mass for the retrieval model.
    pub retrieval_floor: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            smoothing_k: 0.01,
            retrieval_floor: DEFAULT_RETRIEVAL_FLOOR,
        }
    }
}

/// Builds one kind of generator, either by training or from a saved file.
pub trait GeneratorFactory: Send + Sync {
    fn kind(&self) -> &'static str;

    fn train(&self, examples: &[TrainingExample], params: &TrainParams) -> Result<Box<dyn Generator>, GenerationError>;

    /// `body` holds the non-header lines with their 1-based line numbers.
    fn load(&self, params: &BTreeMap<String, String>, body: &[(usize, &str)]) -> Result<Box<dyn Generator>, GenerationError>;
}

struct RetrievalFactory;
struct TrigramFactory;
struct UniformFactory;

impl GeneratorFactory for RetrievalFactory {
    fn kind(&self) -> &'static str {
        "retrieval"
    }

    fn train(&self, examples: &[TrainingExample], params: &TrainParams) -> Result<Box<dyn Generator>, GenerationError> {
        Ok(Box::new(RetrievalBaseline::train(examples, params.retrieval_floor)?))
    }

    fn load(&self, params: &BTreeMap<String, String>, body: &[(usize, &str)]) -> Result<Box<dyn Generator>, GenerationError> {
        Ok(Box::new(RetrievalBaseline::load(params, body)?))
    }
}

impl GeneratorFactory for TrigramFactory {
    fn kind(&self) -> &'static str {
        "trigram"
    }

    fn train(&self, examples: &[TrainingExample], params: &TrainParams) -> Result<Box<dyn Generator>, GenerationError> {
        Ok(Box::new(TrigramBaseline::train(examples, params.smoothing_k)?))
    }

    fn load(&self, params: &BTreeMap<String, String>, body: &[(usize, &str)]) -> Result<Box<dyn Generator>, GenerationError> {
        Ok(Box::new(TrigramBaseline::load(params, body)?))
    }
}

impl GeneratorFactory for UniformFactory {
    fn kind(&self) -> &'static str {
        "uniform"
    }

    fn train(&self, examples: &[TrainingExample], _params: &TrainParams) -> Result<Box<dyn Generator>, GenerationError> {
        if examples.is_empty() {
            return Err(GenerationError::EmptyCorpus);
        }
        let tokens = examples.iter().flat_map(|e| e.response.iter().cloned()).collect();
        Ok(Box::new(UniformGenerator::new(tokens)))
    }

    fn load(&self, _params: &BTreeMap<String, String>, body: &[(usize, &str)]) -> Result<Box<dyn Generator>, GenerationError> {
        let mut vocab = Vec::new();
        for &(line, text) in body {
            match text.split_once('\t') {
                Some(("vocab", t)) => vocab.push(t.to_string()),
                _ => return Err(GenerationError::Format { line, message: "expected a vocab record".into() }),
            }
        }
        Ok(Box::new(UniformGenerator::with_exact_vocabulary(vocab)))
    }
}

/// Generator factories keyed by kind name.
pub struct GeneratorRegistry {
    factories: BTreeMap<&'static str, Box<dyn GeneratorFactory>>,
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl GeneratorRegistry {
    pub fn new() -> Self {
        GeneratorRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding `retrieval`, `trigram` and `uniform`.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Box::new(RetrievalFactory));
        r.register(Box::new(TrigramFactory));
        r.register(Box::new(UniformFactory));
        r
    }

    /// Adds or replaces the factory for its kind.
    pub fn register(&mut self, factory: Box<dyn GeneratorFactory>) {
        self.factories.insert(factory.kind(), factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn get(&self, kind: &str) -> Result<&dyn GeneratorFactory, GenerationError> {
        self.factories
            .get(kind)
            .map(Box::as_ref)
            .ok_or_else(|| GenerationError::UnknownGenerator(kind.to_string(), self.names().join(", ")))
    }

    pub fn train(
        &self,
        kind: &str,
        examples: &[TrainingExample],
        params: &TrainParams,
    ) -> Result<Box<dyn Generator>, GenerationError> {
        self.get(kind)?.train(examples, params)
    }

    /// Reads a saved model, dispatching on the `kind=` header field.
    pub fn load_str(&self, text: &str) -> Result<Box<dyn Generator>, GenerationError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or(GenerationError::Format {
            line: 1,
            message: "empty model file".into(),
        })?;
        let mut fields = header.split(' ');
        if fields.next() != Some(MODEL_MAGIC) {
            return Err(GenerationError::Format { line: 1, message: "not a baseline model file".into() });
        }
        match fields.next() {
            Some(v) if v == MODEL_VERSION => {}
            other => {
                return Err(GenerationError::Format {
                    line: 1,
                    message: format!("unsupported version {other:?}"),
                })
            }
        }
        let mut params = BTreeMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or(GenerationError::Format {
                line: 1,
                message: format!("malformed header field {f:?}"),
            })?;
            params.insert(k.to_string(), v.to_string());
        }
        let kind = params.get("kind").cloned().ok_or(GenerationError::Format {
            line: 1,
            message: "header lacks kind".into(),
        })?;
        let body: Vec<(usize, &str)> = lines.filter(|(_, l)| !l.is_empty()).collect();
        self.get(&kind)?.load(&params, &body)
    }

    pub fn load_file(&self, path: impl AsRef<Path>) -> Result<Box<dyn Generator>, GenerationError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| GenerationError::Format {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        self.load_str(&text)
    }
}
