use paretoplan::config::{generate_model_suite, sample_configs, Complexity, ConfigurationSpace};
use paretoplan::learner::{fit_cart, fit_stepwise, mean_abs_pct_error, spearman, CartParams, Observation, StepwiseParams};

fn main() {
    let d = 20;
    let suite = generate_model_suite(100, d, 7);
    let space = ConfigurationSpace::with_dimension(d).unwrap();
    let held_out = sample_configs(&space, 10_000, 4711).unwrap();
    let mut pass = 0;
    let mut total = 0;
    for class in [Complexity::Easy, Complexity::Hard] {
        let models: Vec<_> = suite.iter().filter(|p| p.complexity == class).take(20).collect();
        for truth in models {
            let train = sample_configs(&space, 100, 1000 + truth.id as u64).unwrap();
            let obs: Vec<Observation> = train.into_iter().map(|c| {
                let v = truth.discharge_model.evaluate(&c).unwrap();
                Observation::new(c, v)
            }).collect();
            let t0 = std::time::Instant::now();
            let fit = fit_stepwise(&obs, &StepwiseParams::default()).unwrap();
            let cart = fit_cart(&obs, &CartParams::default()).unwrap();
            let mape = mean_abs_pct_error(&fit.model, &truth.discharge_model, &held_out).unwrap();
            let cart_mape = mean_abs_pct_error(&cart, &truth.discharge_model, &held_out).unwrap();
            let tv: Vec<f64> = held_out.iter().map(|c| truth.discharge_model.evaluate(c).unwrap()).collect();
            let pv: Vec<f64> = held_out.iter().map(|c| fit.model.evaluate(c).unwrap()).collect();
            let rho = spearman(&tv, &pv).unwrap();
            let ok = mape.percent < 10.0 && rho >= 0.97;
            total += 1;
            pass += ok as usize;
            println!(
                "{:?} #{:>2}: true {:>2} terms, fit {:>3} terms ({:>3} steps, {:>5.1?}) mape {:>8.4}% rho {:.4} cart {:>6.2}% {}",
                class, truth.id, truth.discharge_model.terms.len(), fit.model.terms.len(),
                fit.iterations, t0.elapsed(), mape.percent, rho, cart_mape.percent,
                if ok { "PASS" } else { "FAIL" }
            );
        }
    }
    println!("passed {pass}/{total}");
}
