//! Real-number descriptors: `sqrt:d`, `golden`, `quad:p,q,d,r`, `rat:p/q`,
//! or a plain integer.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exact::QuadraticReal;

pub fn parse_real(s: &str) -> Result<QuadraticReal> {
    let fail = |why: &str| Error::Expr(s.to_string(), why.to_string());
    let int = |t: &str| -> Result<BigInt> {
        t.trim().parse::<BigInt>().map_err(|_| fail(&format!("{t:?} is not an integer")))
    };
    let t = s.trim();
    if t == "golden" {
        return Ok(QuadraticReal::golden());
    }
    let Some((kind, body)) = t.split_once(':') else {
        return Ok(QuadraticReal::from_int(int(t)?));
    };
    match kind {
        "sqrt" => {
            let d: u64 = body.trim().parse().map_err(|_| fail("radicand must be a non-negative integer"))?;
            Ok(QuadraticReal::sqrt(d))
        }
        "rat" => {
            let (p, q) = body.split_once('/').unwrap_or((body, "1"));
            QuadraticReal::rational(int(p)?, int(q)?).map_err(|e| fail(&e.to_string()))
        }
        "quad" => {
            let parts: Vec<&str> = body.split(',').collect();
            let [p, q, d, r] = parts.as_slice() else {
                return Err(fail("quad needs four fields p,q,d,r"));
            };
            let d: u64 = d.trim().parse().map_err(|_| fail("radicand must be a non-negative integer"))?;
            QuadraticReal::new(int(p)?, int(q)?, d, int(r)?).map_err(|e| fail(&e.to_string()))
        }
        other => Err(fail(&format!("unknown form {other:?}"))),
    }
}
