//! Finitely generated modules over truncated hypersurface rings.

mod hom;
mod invariants;
mod lattice;
mod presentation;
mod resolution;

pub(crate) use hom::image_echelon;
pub use hom::{ext_dim, ext_dim_at, hom_dim, hom_space_at, stable_hom_dim, stable_hom_dim_at, HomSpace};
pub use invariants::{
    annihilator_exponent, check_faithful_element, is_indecomposable, multiplicity_module, AnnihilatorExponent,
    FaithfulCheck, Indecomposability, Multiplicity,
};
pub use lattice::{
    hlength, lat_approximation_for_curve, lat_approximation_of_simple, mf_from_presentation, ApproximationReport,
    ApproximationResult, HLength,
};
pub use presentation::{ModuleFile, ModulePresentation};
pub(crate) use resolution::{kernel_ctx, minimal_generators};
pub use resolution::{minimal_resolution, Resolution, ResolutionReport};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::error::MflabError;
    use crate::field::Field;
    use crate::rings::HypersurfaceRing;

    fn ring(vars: &[&str], f: &str) -> HypersurfaceRing {
        HypersurfaceRing::new(Field::fp(7).unwrap(), vars, f, 12).unwrap()
    }

    fn module(r: &HypersurfaceRing, rows: &[&[&str]]) -> ModulePresentation {
        let e: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        ModulePresentation::parse(r, e.len(), &e, 12).unwrap()
    }

    #[test]
    fn periodic_resolution_over_a2() {
        let r = ring(&["y"], "y^3");
        let k = module(&r, &[&["y"]]);
        let res = minimal_resolution(&k, 4, &Context::default()).unwrap();
        assert_eq!(res.betti, vec![1, 1, 1, 1, 1]);
        let alg = k.algebra();
        let orders: Vec<usize> = res
            .differentials
            .iter()
            .map(|d| alg.order(d.get(0, 0)).unwrap())
            .collect();
        assert_eq!(orders, vec![1, 2, 1, 2]);
    }

    #[test]
    fn residue_field_over_node() {
        let r = ring(&["x", "y"], "x*y");
        let k = ModulePresentation::residue_field(&r, 12).unwrap();
        let res = minimal_resolution(&k, 3, &Context::default()).unwrap();
        assert_eq!(res.betti, vec![1, 2, 2, 2]);
        let alg = k.algebra();
        for w in res.differentials.windows(2) {
            let prod = w[0].mul(alg, &w[1]);
            let t = res.windows[1];
            assert!(prod.data.iter().all(|e| alg.order(e).is_none_or(|o| o >= t)));
        }
    }

    #[test]
    fn free_module_has_empty_resolution() {
        let r = ring(&["x", "y"], "x*y");
        let f = ModulePresentation::free(&r, 2, 12).unwrap();
        let res = minimal_resolution(&f, 3, &Context::default()).unwrap();
        assert_eq!(res.betti, vec![2]);
        assert!(res.differentials.is_empty());
    }

    #[test]
    fn unit_entries_are_removed() {
        let r = ring(&["x", "y"], "x*y");
        let m = module(&r, &[&["1", "x"], &["y", "x^2"]]);
        let min = m.minimize();
        assert_eq!(min.rows(), 1);
        assert_eq!(m.betti(), 1);
        assert!(min.is_minimal());
    }

    #[test]
    fn hom_over_artinian_ring() {
        let r = ring(&["y"], "y^3");
        let ctx = Context::default();
        let k = module(&r, &[&["y"]]);
        let free = ModulePresentation::free(&r, 1, 12).unwrap();
        assert_eq!(hom_dim(&k, &k, &ctx).unwrap().value, 1);
        assert_eq!(hom_dim(&free, &k, &ctx).unwrap().value, 1);
        assert_eq!(hom_dim(&k, &free, &ctx).unwrap().value, 1);
        assert_eq!(hom_dim(&free, &free, &ctx).unwrap().value, 3);
        assert_eq!(stable_hom_dim(&k, &k, &ctx).unwrap().value, 1);
        assert_eq!(stable_hom_dim(&free, &k, &ctx).unwrap().value, 0);
    }

    #[test]
    fn hom_lifts_satisfy_relation() {
        let r = ring(&["x", "y"], "x*y");
        let m = module(&r, &[&["x"]]);
        let n = module(&r, &[&["y", "x^2"]]);
        let ctx = Context::default();
        let h = hom_space_at(&m, &n, &ctx).unwrap();
        let alg = m.algebra();
        for (a, b) in h.basis.iter().zip(&h.lifts) {
            assert_eq!(a.mul(alg, m.matrix()), n.matrix().mul(alg, b));
        }
    }

    #[test]
    fn stable_hom_over_node() {
        let r = ring(&["x", "y"], "x*y");
        let ctx = Context::default();
        let a = module(&r, &[&["x"]]);
        let b = module(&r, &[&["y"]]);
        assert_eq!(stable_hom_dim(&a, &a, &ctx).unwrap().value, 1);
        assert_eq!(stable_hom_dim(&a, &b, &ctx).unwrap().value, 0);
        assert_eq!(hom_dim(&a, &b, &ctx).unwrap().value, 0);
        assert!(matches!(hom_dim(&a, &a, &ctx), Err(MflabError::NotStabilized { .. })));
    }

    #[test]
    fn ext_of_residue_field_into_ring() {
        let ctx = Context::default();
        let r = ring(&["x", "y"], "x*y");
        let k = ModulePresentation::residue_field(&r, 12).unwrap();
        let free = ModulePresentation::free(&r, 1, 12).unwrap();
        let dims: Vec<usize> = (0..3).map(|i| ext_dim(&k, &free, i, &ctx).unwrap().value).collect();
        assert_eq!(dims, vec![0, 1, 0]);
        let a2 = ring(&["y"], "y^3");
        let k2 = ModulePresentation::residue_field(&a2, 12).unwrap();
        assert_eq!(ext_dim(&k2, &k2, 1, &ctx).unwrap().value, 1);
        let f2 = ModulePresentation::free(&a2, 1, 12).unwrap();
        assert_eq!(ext_dim(&k2, &f2, 1, &ctx).unwrap().value, 0);
    }
}
