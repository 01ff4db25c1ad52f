//! `vector v1 <graph-hash> <x> <R> <output>`, byte strings in hex.

use super::{EvalError, Evaluator, EvaluatorKind};
use crate::memory::Policy;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestVector {
    pub graph_hash: String,
    pub x: Vec<u8>,
    pub coins: Vec<u8>,
    pub output: Vec<u8>,
}

impl TestVector {
    pub fn generate(e: &Evaluator, graph_hash: &str, x: &[u8], coins: &[u8]) -> Result<TestVector, EvalError> {
        let out = e.eval(EvaluatorKind::Full, x, coins, e.required_cache(), Policy::Lru)?;
        Ok(TestVector { graph_hash: graph_hash.to_string(), x: x.to_vec(), coins: coins.to_vec(), output: out.output })
    }

    pub fn to_line(&self) -> String {
        format!(
            "vector v1 {} {} {} {}",
            self.graph_hash,
            hex::encode(&self.x),
            hex::encode(&self.coins),
            hex::encode(&self.output)
        )
    }

    pub fn parse(line: &str) -> Result<TestVector, String> {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 6 || t[0] != "vector" || t[1] != "v1" {
            return Err("expected `vector v1 <graph-hash> <x> <R> <output>`".into());
        }
        let field = |i: usize, name: &str| hex::decode(t[i]).map_err(|e| format!("{name}: {e}"));
        Ok(TestVector { graph_hash: t[2].to_string(), x: field(3, "x")?, coins: field(4, "R")?, output: field(5, "output")? })
    }

    /// Re-evaluates and compares. The caller checks the graph hash.
    pub fn verify(&self, e: &Evaluator) -> Result<bool, EvalError> {
        let out = e.eval(EvaluatorKind::Full, &self.x, &self.coins, e.required_cache(), Policy::Lru)?;
        Ok(out.output == self.output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{cr_block_partition, line_graph, Gadget};
    use crate::mhf::Oracle;

    #[test]
    fn line_round_trip_and_verify() {
        let host = Gadget { dag: line_graph(12).unwrap(), outputs: 8 };
        let spec = cr_block_partition(&host, 2).unwrap().0;
        let e = Evaluator::new(&spec, &Oracle::default()).unwrap();
        let v = TestVector::generate(&e, "abc", b"\x00\x01", b"\xff").unwrap();
        let line = v.to_line();
        assert!(line.starts_with("vector v1 abc 0001 ff "));
        let back = TestVector::parse(&line).unwrap();
        assert_eq!(back, v);
        assert!(back.verify(&e).unwrap());
        let mut bad = back.clone();
        bad.output[0] ^= 1;
        assert!(!bad.verify(&e).unwrap());
        assert!(TestVector::parse("vector v2 a b c d").is_err());
        assert!(TestVector::parse("vector v1 a zz 00 00").is_err());
    }
}
