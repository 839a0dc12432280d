//! Exact symbolic engine for quadratic algebra presentations and their Koszul
//! dual coalgebras, cyclic homology, the necklace Lie bialgebra attached to a
//! co-Frobenius coalgebra, matrix trace maps at finite rank, and the Hopf
//! algebra quantizing the necklace structure.
//!
//! All arithmetic is exact (arbitrary-precision rationals, polynomial
//! parameters `h`, `hbar`); every structural identity the engine relies on is
//! re-checked by machine in the test suite.

pub mod cyclic;
pub mod error;
pub mod koszul;
pub mod linalg;
pub mod lqt;
pub mod necklace;
pub mod presentations;
pub mod quantization;
pub mod scalar;

pub use error::{EngineError, Result};

#[cfg(test)]
mod dbgtests {
    #[test]
    fn dbg_crossing() {
        use crate::quantization::*;
        use crate::presentations::{preprojective_from_quiver, preset_jordan_quiver};
        let co = preprojective_from_quiver(&preset_jordan_quiver()).unwrap().1;
        let e = co.find("e").unwrap();
        let a = co.find("a").unwrap();
        let astar = co.find("a*").unwrap();
        let w: HeightWord = vec![
            vec![(a, 1), (e, 2), (a, 8), (e, 3)],
            vec![(astar, 4), (e, 5), (astar, 6), (e, 7)],
        ];
        let cols = enumerate_colorings(&co, &w, 2).unwrap();
        println!("colorings: {}", cols.len());
        for c in &cols {
            if c.pairs.len() == 2 {
                println!("  I-full: {:?}", c);
            }
        }
        let t = coproduct(&co, &w, 2).unwrap();
        for (k, s) in &t {
            println!("term {:?} -> {:?}", k, s);
        }
    }
}
