use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// One independent random stream per consumer subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamId {
    Placement,
    Radio,
    Protocol,
    Traffic,
    SinkMotion,
    World,
}

impl StreamId {
    fn word(self) -> u64 {
        match self {
            StreamId::Placement => 1,
            StreamId::Radio => 2,
            StreamId::Protocol => 3,
            StreamId::Traffic => 4,
            StreamId::SinkMotion => 5,
            StreamId::World => 6,
        }
    }
}

/// Factory for the per-subsystem streams of one run.
///
/// Every stream shares the run seed and differs in the ChaCha stream word, so
/// drawing from one never shifts another.
#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, id: StreamId) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id.word());
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    UniformReal,
    /// Half-open integer range `[low, high)`.
    UniformInt {
        low: i64,
        high: i64,
    },
    Bernoulli(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Real(f64),
    Int(i64),
    Bool(bool),
}

#[derive(Debug, Error, PartialEq)]
pub enum RngError {
    #[error("bernoulli probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("empty integer range [{0}, {1})")]
    EmptyRange(i64, i64),
}

pub fn draw<R: Rng + ?Sized>(rng: &mut R, dist: Distribution) -> Result<Sample, RngError> {
    match dist {
        Distribution::UniformReal => Ok(Sample::Real(rng.gen::<f64>())),
        Distribution::UniformInt { low, high } => {
            if low >= high {
                return Err(RngError::EmptyRange(low, high));
            }
            Ok(Sample::Int(rng.gen_range(low..high)))
        }
        Distribution::Bernoulli(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(RngError::Probability(p));
            }
            Ok(Sample::Bool(rng.gen_bool(p)))
        }
    }
}
