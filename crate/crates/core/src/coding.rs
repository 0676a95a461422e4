//! Random linear coding: message packets, node memories, and incremental
//! Gaussian-elimination decoding.
//!
//! Every packet carries a length-K global encoding vector gamma alongside its
//! payload, expressing the payload as sum gamma_k * w_k over the K message
//! packets. Encoding draws uniform coefficients over the stored packets;
//! since a uniform vector pushed through a linear map stays uniform on the
//! image, the encoded packet is uniform on the span of the memory however
//! that memory is represented. That is what makes basis compaction a safe
//! optimization: it changes the stored rows but not the output distribution.

use crate::galois::{FieldElement, FieldSpec};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodingError {
    #[error("message count must be at least 1")]
    EmptyMessageSet,
    #[error("expected vector length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least one candidate vector")]
    EmptySet,
    #[error("span(V1) is contained in span(V2)")]
    SpanContained,
}

/// The K message packets w_1..w_K, each rho field symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageSet {
    k: usize,
    rho: usize,
    payloads: Vec<Vec<FieldElement>>,
}

impl MessageSet {
    pub fn new(payloads: Vec<Vec<FieldElement>>) -> Result<Self, CodingError> {
        let k = payloads.len();
        if k == 0 {
            return Err(CodingError::EmptyMessageSet);
        }
        let rho = payloads[0].len();
        for p in &payloads {
            if p.len() != rho {
                return Err(CodingError::DimensionMismatch { expected: rho, got: p.len() });
            }
        }
        Ok(MessageSet { k, rho, payloads })
    }

    /// Uniformly random payload symbols.
    pub fn random<R: Rng + ?Sized>(
        field: &FieldSpec,
        k: usize,
        rho: usize,
        rng: &mut R,
    ) -> Result<Self, CodingError> {
        if k == 0 {
            return Err(CodingError::EmptyMessageSet);
        }
        let payloads = (0..k)
            .map(|_| (0..rho).map(|_| field.random_element(rng)).collect())
            .collect();
        Ok(MessageSet { k, rho, payloads })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn payload(&self, i: usize) -> &[FieldElement] {
        &self.payloads[i]
    }

    pub fn payloads(&self) -> &[Vec<FieldElement>] {
        &self.payloads
    }
}

/// A coded packet: global encoding vector plus payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub gamma: Vec<FieldElement>,
    pub payload: Vec<FieldElement>,
}

impl Packet {
    pub fn zero(k: usize, rho: usize) -> Self {
        Packet { gamma: vec![0; k], payload: vec![0; rho] }
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(|&g| g == 0)
    }

    /// Checks payload = sum gamma_k * w_k against the ground-truth messages.
    pub fn consistent_with(&self, field: &FieldSpec, messages: &MessageSet) -> bool {
        if self.gamma.len() != messages.k || self.payload.len() != messages.rho {
            return false;
        }
        let mut expect = vec![0u16; messages.rho];
        for (i, &g) in self.gamma.iter().enumerate() {
            field.axpy(g, &messages.payloads[i], &mut expect);
        }
        expect == self.payload
    }
}

/// Rows held in reduced row-echelon form over (gamma | payload), pivots on
/// the gamma side only. Shared by the decoder, compacted memories, and the
/// span tests below.
#[derive(Debug, Clone)]
struct Rref {
    rho: usize,
    rows: Vec<Packet>,
    pivots: Vec<usize>,
}

impl Rref {
    fn new(rho: usize) -> Self {
        Rref { rho, rows: Vec::new(), pivots: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Forward-reduces a copy of `p` against the current rows.
    fn reduce(&self, field: &FieldSpec, p: &Packet) -> Packet {
        let mut out = p.clone();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = out.gamma[piv];
            if c != 0 {
                field.axpy(c, &row.gamma, &mut out.gamma);
                field.axpy(c, &row.payload, &mut out.payload);
            }
        }
        out
    }

    /// Inserts `p` if it is independent of the current rows, restoring full
    /// reduced form. Returns whether the rank grew.
    fn insert(&mut self, field: &FieldSpec, p: &Packet) -> bool {
        let mut reduced = self.reduce(field, p);
        let Some(pivot) = reduced.gamma.iter().position(|&g| g != 0) else {
            return false;
        };
        let inv = field.inv(reduced.gamma[pivot]).expect("pivot is nonzero");
        field.scale(inv, &mut reduced.gamma);
        field.scale(inv, &mut reduced.payload);
        for row in &mut self.rows {
            let c = row.gamma[pivot];
            if c != 0 {
                field.axpy(c, &reduced.gamma, &mut row.gamma);
                field.axpy(c, &reduced.payload, &mut row.payload);
            }
        }
        let at = self.pivots.partition_point(|&q| q < pivot);
        self.pivots.insert(at, pivot);
        self.rows.insert(at, reduced);
        true
    }
}

/// A node's packet store. Raw mode keeps every received packet verbatim;
/// compact mode keeps only a row-reduced basis of the same span.
#[derive(Debug, Clone)]
pub struct NodeMemory {
    k: usize,
    rho: usize,
    raw: Vec<Packet>,
    basis: Option<Rref>,
}

impl NodeMemory {
    pub fn empty(k: usize, rho: usize) -> Self {
        NodeMemory { k, rho, raw: Vec::new(), basis: None }
    }

    /// Source memory: the K message packets with unit encoding vectors.
    pub fn source(messages: &MessageSet) -> Self {
        let mut mem = NodeMemory::empty(messages.k, messages.rho);
        for (i, w) in messages.payloads.iter().enumerate() {
            let mut gamma = vec![0u16; messages.k];
            gamma[i] = 1;
            mem.raw.push(Packet { gamma, payload: w.clone() });
        }
        mem
    }

    /// Switches to basis storage. Must be set before any packets arrive.
    pub fn compacted(mut self) -> Self {
        let mut basis = Rref::new(self.rho);
        for p in self.raw.drain(..) {
            // Field is irrelevant for unit vectors, but source rows are the
            // only possible occupants here and they are already reduced.
            basis.rows.push(p);
        }
        basis.pivots = (0..basis.rows.len()).collect();
        self.basis = Some(basis);
        self
    }

    pub fn store(&mut self, field: &FieldSpec, p: Packet) {
        debug_assert_eq!(p.gamma.len(), self.k);
        match &mut self.basis {
            Some(basis) => {
                basis.insert(field, &p);
            }
            None => self.raw.push(p),
        }
    }

    pub fn packet_count(&self) -> usize {
        match &self.basis {
            Some(basis) => basis.rank(),
            None => self.raw.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.packet_count() == 0
    }

    /// Emits a uniform random combination of the stored packets; the zero
    /// packet when the memory is empty.
    pub fn encode<R: Rng + ?Sized>(&self, field: &FieldSpec, rng: &mut R) -> Packet {
        let rows: &[Packet] = match &self.basis {
            Some(basis) => &basis.rows,
            None => &self.raw,
        };
        let mut out = Packet::zero(self.k, self.rho);
        for row in rows {
            let c = field.random_element(rng);
            field.axpy(c, &row.gamma, &mut out.gamma);
            field.axpy(c, &row.payload, &mut out.payload);
        }
        out
    }
}

/// Incremental Gaussian elimination over received packets.
#[derive(Debug, Clone)]
pub struct DecoderState {
    k: usize,
    rref: Rref,
}

impl DecoderState {
    pub fn new(k: usize, rho: usize) -> Self {
        DecoderState { k, rref: Rref::new(rho) }
    }

    /// Folds in one packet; returns whether it was innovative.
    pub fn receive(&mut self, field: &FieldSpec, p: &Packet) -> Result<bool, CodingError> {
        if p.gamma.len() != self.k {
            return Err(CodingError::DimensionMismatch { expected: self.k, got: p.gamma.len() });
        }
        if p.payload.len() != self.rref.rho {
            return Err(CodingError::DimensionMismatch {
                expected: self.rref.rho,
                got: p.payload.len(),
            });
        }
        Ok(self.rref.insert(field, p))
    }

    pub fn rank(&self) -> usize {
        self.rref.rank()
    }

    pub fn is_complete(&self) -> bool {
        self.rref.rank() == self.k
    }

    /// At rank K the reduced rows form the identity on the gamma side, so the
    /// mirrored payloads are exactly the original messages.
    pub fn try_decode(&self) -> Option<MessageSet> {
        if self.rref.rank() < self.k {
            return None;
        }
        let payloads = self.rref.rows.iter().map(|r| r.payload.clone()).collect();
        Some(MessageSet { k: self.k, rho: self.rref.rho, payloads })
    }
}

/// Probability that a uniform random K x K matrix over F_q is invertible:
/// product over i of (1 - q^-i).
pub fn invertibility_probability(k: usize, q: u32) -> f64 {
    assert!(k >= 1, "need at least one message");
    assert!(q >= 2, "field size must be at least 2");
    let mut p = 1.0f64;
    for i in 1..=k as i32 {
        p *= 1.0 - (q as f64).powi(-i);
    }
    p
}

/// Bits of header per packet: K symbols of log2(q) bits each.
pub fn header_overhead_bits(k: usize, field: &FieldSpec) -> u64 {
    k as u64 * field.m() as u64
}

/// Empirical probability that a uniform random combination of `v1` falls
/// outside span(`v2`). The span-noncontainment precondition mirrors the
/// hypothesis of the innovation lemma, whose bound 1 - 1/q this estimate
/// must meet.
pub fn innovation_probability_experiment<R: Rng + ?Sized>(
    field: &FieldSpec,
    v1: &[Vec<FieldElement>],
    v2: &[Vec<FieldElement>],
    trials: u64,
    rng: &mut R,
) -> Result<f64, CodingError> {
    if v1.is_empty() {
        return Err(CodingError::EmptySet);
    }
    let dim = v1[0].len();
    for v in v1.iter().chain(v2) {
        if v.len() != dim {
            return Err(CodingError::DimensionMismatch { expected: dim, got: v.len() });
        }
    }
    let mut span2 = Rref::new(0);
    for v in v2 {
        span2.insert(field, &Packet { gamma: v.clone(), payload: Vec::new() });
    }
    let contained = v1.iter().all(|v| {
        let r = span2.reduce(field, &Packet { gamma: v.clone(), payload: Vec::new() });
        r.gamma.iter().all(|&g| g == 0)
    });
    if contained {
        return Err(CodingError::SpanContained);
    }
    let mut hits = 0u64;
    let mut combo = vec![0u16; dim];
    for _ in 0..trials {
        combo.fill(0);
        for v in v1 {
            let c = field.random_element(rng);
            field.axpy(c, v, &mut combo);
        }
        let reduced = span2.reduce(field, &Packet { gamma: combo.clone(), payload: Vec::new() });
        if reduced.gamma.iter().any(|&g| g != 0) {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}
