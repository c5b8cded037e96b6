use num_integer::binomial;

use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::homalg::{minimal_resolution, ModulePresentation};
use crate::report::Status;
use crate::rings::HypersurfaceRing;

use super::ExperimentReport;

/// C(d + n - 1, d - 1).
pub fn kawasaki_bound(d: usize, n: usize) -> u128 {
    if d == 0 {
        return 0;
    }
    binomial((d + n - 1) as u128, (d - 1) as u128)
}

/// β(Ω^{d+1}(R/m^n)) against the binomial lower bound.
pub fn kawasaki_growth(ring: &HypersurfaceRing, n: usize, ctx: &Context) -> Result<ExperimentReport> {
    let d = ring.dim();
    let e = ring.order_f();
    if d < 2 {
        return Err(MflabError::InvalidInput(format!("needs Krull dimension >= 2, got {d}")));
    }
    if n <= e {
        return Err(MflabError::InvalidInput(format!("needs n > e(R) = {e}, got n = {n}")));
    }
    let trunc = ctx.trunc();
    let ring = ring.with_trunc(trunc);
    let m = ModulePresentation::power_of_maximal_ideal(&ring, n, trunc)?;
    let res = minimal_resolution(&m, d + 1, ctx)?;
    let beta = res.betti.get(d + 1).copied().unwrap_or(0);
    let bound = kawasaki_bound(d, n);
    let ok = beta as u128 >= bound;
    let mut rep = ExperimentReport::new(
        "kawasaki",
        serde_json::json!({ "ring": ring.to_string(), "n": n, "d": d, "e": e }),
        ctx,
    );
    rep.push(
        format!("n={n}"),
        Status::from_bool(ok),
        serde_json::json!({
            "betti": res.betti,
            "windows": res.windows,
            "syzygy": d + 1,
            "beta": beta,
            "bound": bound.to_string(),
        }),
    );
    rep.summary = serde_json::json!({ "beta": beta, "bound": bound.to_string() });
    rep.notes
        .push("indecomposability of the syzygy is not checked at this size".to_string());
    Ok(rep.finish([]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    #[test]
    fn bound_values() {
        assert_eq!(kawasaki_bound(2, 4), 5);
        assert_eq!(kawasaki_bound(2, 5), 6);
        assert_eq!(kawasaki_bound(3, 4), 15);
        assert_eq!(kawasaki_bound(1, 7), 1);
    }

    #[test]
    fn guards() {
        let f = Field::fp(7).unwrap();
        let ctx = Context::new(8, 42);
        let cubic = HypersurfaceRing::new(f.clone(), &["x", "y", "z"], "x^3 + y^3 + z^3", 8).unwrap();
        assert!(matches!(
            kawasaki_growth(&cubic, 3, &ctx),
            Err(MflabError::InvalidInput(_))
        ));
        let node = HypersurfaceRing::new(f, &["x", "y"], "x*y", 8).unwrap();
        assert!(matches!(
            kawasaki_growth(&node, 4, &ctx),
            Err(MflabError::InvalidInput(_))
        ));
    }

    #[test]
    fn a1_surface_small() {
        // xy - z^2, e = 2, n = 3: bound C(4, 1) = 4.
        let f = Field::fp(7).unwrap();
        let ctx = Context::new(10, 42);
        let r = HypersurfaceRing::new(f, &["x", "y", "z"], "x*y - z^2", 10).unwrap();
        let rep = kawasaki_growth(&r, 3, &ctx).unwrap();
        assert!(rep.passed(), "{:?}", rep);
    }
}
