use sketchsolve::instance::{generate, InstanceSpec};
use sketchsolve::{prepare, query_entry, sample_solution, SampledVector, SolverConfig, StreamSplitter};

fn main() -> sketchsolve::Result<()> {
    let inst = generate(&InstanceSpec::new(500, 400, 2, 3.0, 7))?;
    let a = inst.sampled(false)?;
    let b = SampledVector::build(inst.b.as_slice())?;

    let cfg = SolverConfig::new(2, 300, 0.05, 0.05, 11);
    let state = prepare(&a, &b, &cfg)?;
    let x0 = query_entry(&state, &a, 0)?;
    let j = sample_solution(&state, &a, cfg.epsilon, &mut StreamSplitter::new(1).stream("rejection"))?;
    println!("x(0) ≈ {x0}, sampled index {j}, ledger {:?}", a.ledger_snapshot());
    println!("exact x(0) = {}", inst.solution()[0]);
    Ok(())
}
