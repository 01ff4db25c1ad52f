//! Small-domain keyed permutations of `[m] = {0, .., m-1}`.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{p} outside the permutation domain [0, {m})")]
pub struct RangeError {
    pub p: usize,
    pub m: usize,
}

/// One permutation of `[m]` per tweak.
pub trait PermutationFamily {
    fn enc(&mut self, tweak: u64, m: usize, p: usize) -> Result<usize, RangeError>;
    fn dec(&mut self, tweak: u64, m: usize, q: usize) -> Result<usize, RangeError>;

    /// `table[p] = enc(p)`.
    fn table(&mut self, tweak: u64, m: usize) -> Vec<usize> {
        (0..m).map(|p| self.enc(tweak, m, p).expect("in range")).collect()
    }
}

fn check(p: usize, m: usize) -> Result<(), RangeError> {
    if p < m {
        Ok(())
    } else {
        Err(RangeError { p, m })
    }
}

fn inverse(fwd: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; fwd.len()];
    for (p, &q) in fwd.iter().enumerate() {
        inv[q] = p;
    }
    inv
}

/// `Enc(key ∘ tweak, ·)`: a Fisher–Yates shuffle driven by ChaCha20 seeded
/// from SHA-256 of the key and tweak.
#[derive(Clone, Debug)]
pub struct KeyedPerm {
    key: Vec<u8>,
    cache: HashMap<(u64, usize), (Vec<usize>, Vec<usize>)>,
}

impl KeyedPerm {
    pub fn new(key: &[u8]) -> KeyedPerm {
        KeyedPerm { key: key.to_vec(), cache: HashMap::new() }
    }

    fn tables(&mut self, tweak: u64, m: usize) -> &(Vec<usize>, Vec<usize>) {
        let key = &self.key;
        self.cache.entry((tweak, m)).or_insert_with(|| {
            let mut h = Sha256::new();
            h.update(b"pebblemark/enc");
            h.update((key.len() as u64).to_be_bytes());
            h.update(key);
            h.update(tweak.to_be_bytes());
            h.update((m as u64).to_be_bytes());
            let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
            let mut fwd: Vec<usize> = (0..m).collect();
            fwd.shuffle(&mut rng);
            let inv = inverse(&fwd);
            (fwd, inv)
        })
    }
}

impl PermutationFamily for KeyedPerm {
    fn enc(&mut self, tweak: u64, m: usize, p: usize) -> Result<usize, RangeError> {
        check(p, m)?;
        Ok(self.tables(tweak, m).0[p])
    }

    fn dec(&mut self, tweak: u64, m: usize, q: usize) -> Result<usize, RangeError> {
        check(q, m)?;
        Ok(self.tables(tweak, m).1[q])
    }
}

#[derive(Clone, Debug)]
struct Partial {
    fwd: Vec<Option<usize>>,
    inv: Vec<Option<usize>>,
    free_images: Vec<usize>,
    free_preimages: Vec<usize>,
}

impl Partial {
    fn new(m: usize) -> Partial {
        Partial { fwd: vec![None; m], inv: vec![None; m], free_images: (0..m).collect(), free_preimages: (0..m).collect() }
    }

    fn bind(&mut self, p: usize, q: usize) {
        self.fwd[p] = Some(q);
        self.inv[q] = Some(p);
        self.free_images.retain(|&x| x != q);
        self.free_preimages.retain(|&x| x != p);
    }
}

/// The hybrid family: a truly random permutation per tweak, sampled one
/// entry at a time as queries arrive and remembered in a table.
#[derive(Clone, Debug)]
pub struct LazyPerm {
    rng: ChaCha20Rng,
    tables: HashMap<(u64, usize), Partial>,
}

impl LazyPerm {
    pub fn new(rng: ChaCha20Rng) -> LazyPerm {
        LazyPerm { rng, tables: HashMap::new() }
    }

    pub fn sampled(&self, tweak: u64, m: usize) -> usize {
        self.tables.get(&(tweak, m)).map_or(0, |t| t.fwd.iter().flatten().count())
    }
}

impl PermutationFamily for LazyPerm {
    fn enc(&mut self, tweak: u64, m: usize, p: usize) -> Result<usize, RangeError> {
        check(p, m)?;
        let t = self.tables.entry((tweak, m)).or_insert_with(|| Partial::new(m));
        if let Some(q) = t.fwd[p] {
            return Ok(q);
        }
        let q = t.free_images[self.rng.gen_range(0..t.free_images.len())];
        t.bind(p, q);
        Ok(q)
    }

    fn dec(&mut self, tweak: u64, m: usize, q: usize) -> Result<usize, RangeError> {
        check(q, m)?;
        let t = self.tables.entry((tweak, m)).or_insert_with(|| Partial::new(m));
        if let Some(p) = t.inv[q] {
            return Ok(p);
        }
        let p = t.free_preimages[self.rng.gen_range(0..t.free_preimages.len())];
        t.bind(p, q);
        Ok(p)
    }
}

/// No shuffling at all; the leaky ablation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl PermutationFamily for Identity {
    fn enc(&mut self, _: u64, m: usize, p: usize) -> Result<usize, RangeError> {
        check(p, m).map(|_| p)
    }

    fn dec(&mut self, _: u64, m: usize, q: usize) -> Result<usize, RangeError> {
        check(q, m).map(|_| q)
    }
}
