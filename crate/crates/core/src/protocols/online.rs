use std::sync::atomic::{AtomicUsize, Ordering};

use crate::codes::StabilizerCode;
use crate::decoders::{BpConfig, Decoder, DecoderKind, DecodingProblem, MIN_PRIOR};
use crate::error::Result;
use crate::gf2::BitVec;

/// Decoder for the plain check matrices of a CSS code, one per sector, with
/// a uniform prior. This is the decoder run during teleportation and final
/// readout; it never sees a circuit error model.
#[derive(Debug)]
pub struct CodeCapacityDecoder {
    kind: DecoderKind,
    x_checks: Decoder,
    z_checks: Decoder,
    calls: AtomicUsize,
}

impl CodeCapacityDecoder {
    /// `prior` is clamped into `[MIN_PRIOR, 1/2]`.
    pub fn new(code: &StabilizerCode, kind: DecoderKind, bp: BpConfig, prior: f64) -> Result<Self> {
        let p = prior.clamp(MIN_PRIOR, 0.5);
        let x = DecodingProblem::uniform(code.h_x.clone(), p, Some(code.logical_x.clone()))?;
        let z = DecodingProblem::uniform(code.h_z.clone(), p, Some(code.logical_z.clone()))?;
        Ok(Self {
            kind,
            x_checks: Decoder::new(kind, x, bp)?,
            z_checks: Decoder::new(kind, z, bp)?,
            calls: AtomicUsize::new(0),
        })
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    /// Problem over the X checks (its variables are Z errors).
    pub fn x_problem(&self) -> &DecodingProblem {
        self.x_checks.problem()
    }

    /// Problem over the Z checks (its variables are X errors).
    pub fn z_problem(&self) -> &DecodingProblem {
        self.z_checks.problem()
    }

    /// Number of sector decodes performed so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    /// Z-type recovery for an X-check syndrome. A decoder failure yields
    /// the empty recovery.
    pub fn recover_z(&self, syndrome: &BitVec) -> BitVec {
        self.run(&self.x_checks, syndrome)
    }

    /// X-type recovery for a Z-check syndrome.
    pub fn recover_x(&self, syndrome: &BitVec) -> BitVec {
        self.run(&self.z_checks, syndrome)
    }

    fn run(&self, d: &Decoder, syndrome: &BitVec) -> BitVec {
        self.calls.fetch_add(1, Ordering::Relaxed);
        match d.decode(syndrome) {
            Ok(r) => r.correction,
            Err(_) => BitVec::zeros(d.problem().num_vars()),
        }
    }
}
