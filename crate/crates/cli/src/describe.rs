//! Human-readable statements of every check.

/// `(name, statement)` for each check, in catalogue order.
pub const CHECKS: &[(&str, &str)] = &[
    (
        "exact-error",
        "max over grid nodes of |u - u_exact| <= tol, for scenarios whose boundary data is a closed-form solution",
    ),
    (
        "residual",
        "max |Δ_h u - ∂ₜu - λ₊χ{u>0} + λ₋χ{u<0}| <= tol at interior nodes whose stencil stays in one phase",
    ),
    (
        "nondegeneracy",
        "at (t⁰,x⁰) ∈ ∂{u>0}: sup_{Q_r⁻(t⁰,x⁰)} u ≥ 1/(8n)·inf_{Q_r} λ₊·r², \
         at (t⁰,x⁰) ∈ ∂{u<0}: inf_{Q_r⁻(t⁰,x⁰)} u ≤ -1/(8n)·inf_{Q_r} λ₋·r², \
         both compared with slack factor (1 - h/r)",
    ),
    (
        "monotonicity",
        "r ↦ Φ(r,w) = r⁻⁴ I(r,max(w,0)) I(r,max(-w,0)) is non-decreasing, \
         I(r,v) = ∫_{-r²}^0 ∫ |∇v|² G(t,x) dx dt with G(t,x) = (4π(-t))^{-n/2} exp(|x|²/(4t)), \
         for w = ∂ₑu; decreases up to tol·max|Φ| are tolerated",
    ),
    (
        "directional",
        "for the blow-up u_r at a branch point, gated by closeness ≤ δ := λ_min ε/(48n) and |∇λ±| ≤ δ: \
         min_{Q_{1/2}} ε⁻¹∂ₑu_r - |u_r| ≥ -C·h for every e with e·ν ≥ ε; \
         tempo-spatial form min_{Q_{1/2}} ε⁻¹(α∂ₜu_r + ∂ₑu_r) - |u_r| ≥ -C·h for α ∈ [-1,1] \
         with δ := λ_min ε r̃² σ̃²/(48n)",
    ),
    (
        "closeness",
        "r⁻² sup_{Q_r}|u - h̃| + r⁻¹ sup_{Q_r}|∇u - ∇h̃| + sup_{Q_r}|∂ₜu| decreases as r shrinks at a branch point, \
         h̃ = λ₊ max(x·ν,0)²/2 - λ₋ max(-x·ν,0)²/2 with frozen coefficients; \
         sup_{Q_r}|∂ₜu| is non-increasing and at least halves from the largest to the smallest radius",
    ),
    (
        "graph",
        "∂{u>0} ∩ Q_r is a graph x·ν = f(t,x') with spatial Lipschitz norm sup |f(t,x') - f(t,y')|/|x' - y'| ≤ 1; \
         the normal-continuity modulus max |ν(p) - ν(q)| over parabolic distance ≤ δ is tabulated",
    ),
    ("oddness", "v(t,x) = -v(t,-x₁,x') at every node of the reflected field"),
    (
        "temporal-quotient",
        "max |f(t,x') - f(s,x')|/|t - s| of the graph of ∂{v>0} near the contact point keeps at least \
         80% of its value under one refinement (h/2, dt/4): the free boundary is Lipschitz but not C¹ in time",
    ),
    (
        "forward-uniqueness",
        "two solutions with equal data on the parabolic boundary agree: max |u1 - u2| ≤ 10 × solver tolerance",
    ),
];

pub fn describe(check: &str) -> Option<&'static str> {
    CHECKS.iter().find(|(n, _)| *n == check).map(|(_, d)| *d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use twophase_core::scenarios::Check;

    #[test]
    fn every_check_is_described() {
        for name in Check::NAMES {
            assert!(describe(name).is_some(), "{name}");
        }
        assert_eq!(CHECKS.len(), Check::NAMES.len());
        assert!(describe("nondegeneracy").unwrap().contains("sup_{Q_r⁻(t⁰,x⁰)} u ≥ 1/(8n)·inf_{Q_r} λ₊·r²"));
        assert!(describe("bogus").is_none());
    }
}
