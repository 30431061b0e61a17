//! Binary field snapshots.
//!
//! Layout, little-endian: magic `CSH2`, version `u32`, `n u32`, `L f64`,
//! `t f64`, `sigma i8`, then `phi` and `u` as interleaved `(re, im)` `f64`
//! pairs and `a0, a1, a2` as `f64`, all physical and row-major, and finally
//! the CRC32 of every preceding byte.

use crate::output::write_atomic;
use crate::CliError;
use csh_core::model::{CshState, Sigma};
use csh_core::spectral::{Complex64, GridSpec, Repr, ScalarField, ValueKind};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"CSH2";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 4 + 4 + 8 + 8 + 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: u32,
    pub l: f64,
    pub t: f64,
    pub sigma: i8,
    pub phi: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub a: [Vec<f64>; 3],
}

fn physical(f: &ScalarField) -> ScalarField {
    f.to_physical()
}

impl Snapshot {
    pub fn of(state: &CshState) -> Self {
        let g = state.grid();
        let re = |f: &ScalarField| physical(f).data().iter().map(|z| z.re).collect::<Vec<f64>>();
        Self {
            n: g.n as u32,
            l: g.period_length,
            t: state.t,
            sigma: state.sigma.as_i8(),
            phi: physical(&state.phi).into_data(),
            u: physical(&state.u).into_data(),
            a: [re(&state.a0), re(&state.a1), re(&state.a2)],
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(HEADER + self.phi.len() * 32 + self.a[0].len() * 24 + 4);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&self.n.to_le_bytes());
        b.extend_from_slice(&self.l.to_le_bytes());
        b.extend_from_slice(&self.t.to_le_bytes());
        b.extend_from_slice(&self.sigma.to_le_bytes());
        for field in [&self.phi, &self.u] {
            for z in field {
                b.extend_from_slice(&z.re.to_le_bytes());
                b.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        for field in &self.a {
            for x in field {
                b.extend_from_slice(&x.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&b);
        b.extend_from_slice(&crc.to_le_bytes());
        b
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER + 4 {
            return Err(format!("truncated: {} bytes", bytes.len()));
        }
        if &bytes[..4] != MAGIC {
            return Err("bad magic bytes".into());
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        let mut pos = 4;
        let mut take = |k: usize| -> &[u8] {
            let s = &body[pos..pos + k];
            pos += k;
            s
        };
        let version = u32::from_le_bytes(take(4).try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(format!("unsupported version {version}"));
        }
        let n = u32::from_le_bytes(take(4).try_into().expect("4 bytes"));
        let l = f64::from_le_bytes(take(8).try_into().expect("8 bytes"));
        let t = f64::from_le_bytes(take(8).try_into().expect("8 bytes"));
        let sigma = take(1)[0] as i8;
        if !(n >= 8 && n.is_power_of_two()) {
            return Err(format!("bad grid size {n}"));
        }
        let cells = (n as usize) * (n as usize);
        let want = HEADER + cells * (2 * 16 + 3 * 8);
        if body.len() != want {
            return Err(format!("length {} does not match n = {n} (expected {})", bytes.len(), want + 4));
        }
        if crc32fast::hash(body) != stored {
            return Err("CRC mismatch".into());
        }
        if sigma != 1 && sigma != -1 {
            return Err(format!("bad sign {sigma}"));
        }
        let mut f64s = body[HEADER..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        let mut complex = || (0..cells).map(|_| Complex64::new(f64s.next().unwrap(), f64s.next().unwrap())).collect();
        let phi: Vec<Complex64> = complex();
        let u: Vec<Complex64> = complex();
        let a = [(); 3].map(|_| (0..cells).map(|_| f64s.next().unwrap()).collect::<Vec<f64>>());
        let finite = phi.iter().chain(&u).all(|z| z.re.is_finite() && z.im.is_finite())
            && a.iter().flatten().all(|x| x.is_finite())
            && l.is_finite()
            && t.is_finite();
        if !finite {
            return Err("non-finite values".into());
        }
        Ok(Self { n, l, t, sigma, phi, u, a })
    }

    /// The state at the snapshot time; potentials are re-solved from
    /// `(phi, u)`.
    pub fn to_state(&self, dealias_fraction: f64) -> Result<CshState, String> {
        let g = GridSpec::new(self.n as usize, self.l, dealias_fraction).map_err(|e| e.to_string())?;
        let field = |d: &[Complex64]| {
            ScalarField::from_data(g, Repr::Physical, ValueKind::Complex, d.to_vec()).map_err(|e| e.to_string())
        };
        let sigma = Sigma::from_i64(self.sigma as i64).map_err(|e| e.to_string())?;
        CshState::new(field(&self.phi)?, field(&self.u)?, sigma, self.t).map_err(|e| e.to_string())
    }

    pub fn phi_field(&self, g: GridSpec) -> ScalarField {
        ScalarField::from_data(g, Repr::Physical, ValueKind::Complex, self.phi.clone()).expect("sized by n")
    }

    pub fn u_field(&self, g: GridSpec) -> ScalarField {
        ScalarField::from_data(g, Repr::Physical, ValueKind::Complex, self.u.clone()).expect("sized by n")
    }
}

pub fn write(path: &Path, state: &CshState) -> Result<(), CliError> {
    write_atomic(path, &Snapshot::of(state).encode())
}

pub fn read(path: &Path) -> Result<Snapshot, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    Snapshot::decode(&bytes).map_err(|e| CliError::Format(format!("{}: corrupt snapshot: {e}", path.display())))
}
