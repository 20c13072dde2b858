//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the logic can be
//! tested natively.

use ftsim::hamming::{component_crashes, decode49, hierarchical_decode49, Syndrome49, CONCAT_LEN};
use ftsim::harness::run_sweep;
use ftsim::{AncillaFactory, FactoryConfig, LogicalState, Noise, NoiseParams, RandomSource, Scheme, SweepConfig};
use wasm_bindgen::prelude::*;

fn to_mask(bits: &[u8]) -> u64 {
    bits.iter()
        .take(CONCAT_LEN)
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .fold(0, |m, (q, _)| m | 1 << q)
}

fn to_bits(mask: u64) -> Vec<u8> {
    (0..CONCAT_LEN).map(|q| (mask >> q & 1) as u8).collect()
}

/// Both decoders applied to one bit-flip pattern.
#[wasm_bindgen]
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoding {
    syndrome: Vec<u8>,
    exact: Vec<u8>,
    level: Vec<u8>,
    exact_fails: bool,
    level_fails: bool,
}

#[wasm_bindgen]
impl Decoding {
    /// Seven inner syndromes then the outer one, each 0..=7.
    #[wasm_bindgen(getter)]
    pub fn syndrome(&self) -> Vec<u8> {
        self.syndrome.clone()
    }

    /// Flips chosen by minimum-weight decoding of the whole code.
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<u8> {
        self.exact.clone()
    }

    /// Flips chosen by decoding each block, then the outer code.
    #[wasm_bindgen(getter)]
    pub fn level(&self) -> Vec<u8> {
        self.level.clone()
    }

    #[wasm_bindgen(getter, js_name = exactFails)]
    pub fn exact_fails(&self) -> bool {
        self.exact_fails
    }

    #[wasm_bindgen(getter, js_name = levelFails)]
    pub fn level_fails(&self) -> bool {
        self.level_fails
    }
}

/// `bits` holds one byte per qubit (nonzero = flipped), row-major over the
/// seven blocks.
pub fn decode_pattern(bits: &[u8]) -> Decoding {
    let mask = to_mask(bits);
    let s = Syndrome49::of_mask(mask);
    let exact = decode49(s).flips;
    let level = hierarchical_decode49(s).flips;
    let mut syndrome: Vec<u8> = (0..7).map(|b| s.inner(b).value()).collect();
    syndrome.push(s.outer().value());
    Decoding {
        syndrome,
        exact: to_bits(exact),
        level: to_bits(level),
        exact_fails: component_crashes(mask),
        // the residual has zero syndrome; odd weight means a logical error
        level_fails: (mask ^ level).count_ones() % 2 == 1,
    }
}

#[wasm_bindgen]
pub fn decode(bits: &[u8]) -> Decoding {
    decode_pattern(bits)
}

/// Measured acceptance of the idealized 49-qubit preparation next to
/// `(1 - 3 gamma / 4)^49`: `[measured, expected, standard error]`.
pub fn ideal_acceptance_point(gamma: f64, attempts: u32, seed: u64) -> Result<[f64; 3], String> {
    let params = NoiseParams::new(gamma).map_err(|e| e.to_string())?;
    let mut factory = AncillaFactory::new(FactoryConfig::new(Scheme::Ideal)).map_err(|e| e.to_string())?;
    let mut noise = Noise::new(params, RandomSource::new(seed));
    let mut delivered = 0u64;
    let mut tried = 0u64;
    while tried < attempts as u64 {
        factory.prepare49(&mut noise, LogicalState::Plus).map_err(|e| e.to_string())?;
        let s = factory.take_stats();
        tried += s.attempts49;
        delivered += s.delivered49;
    }
    let expected = (1.0 - 0.75 * gamma).powi(49);
    let se = (expected * (1.0 - expected) / tried as f64).sqrt();
    Ok([delivered as f64 / tried as f64, expected, se])
}

#[wasm_bindgen(js_name = idealAcceptance)]
pub fn ideal_acceptance(gamma: f64, attempts: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    ideal_acceptance_point(gamma, attempts, seed as u64)
        .map(Vec::from)
        .map_err(|e| JsError::new(&e))
}

/// Crash rate per round at each rate, with Wilson bounds:
/// `[rate, low, high]` per point, flattened.
pub fn crash_rates(scheme: &str, gammas: &[f64], trials: u32, seed: u64) -> Result<Vec<f64>, String> {
    let scheme: Scheme = scheme.parse().map_err(|e: ftsim::SimError| e.to_string())?;
    let rows = run_sweep(gammas, &SweepConfig::new(scheme, trials as u64, seed)).map_err(|e| e.to_string())?;
    Ok(rows.iter().flat_map(|r| [r.crash_rate, r.ci_low, r.ci_high]).collect())
}

#[wasm_bindgen(js_name = crashRates)]
pub fn crash_rates_js(scheme: &str, gammas: &[f64], trials: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    crash_rates(scheme, gammas, trials, seed as u64).map_err(|e| JsError::new(&e))
}
