use mints_core::model::Belief;
use mints_core::pricing::{
    pricing_posterior, simulate_demand, Hypothesis, PriceGrid, PricingPosterior, PricingStats, ValuationModel,
};
use mints_core::RngStream;

#[test]
fn warm_engine_survives_a_first_sale_at_an_idle_price() {
    // Replays a stream in which a price first sells after its warm start
    // had settled on the lower box edge.
    let prices: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let grid = PriceGrid::new(prices, 2.0).unwrap();
    let valuation = ValuationModel::uniform(0.0, 1.0).unwrap();
    let prior = Belief::uniform((0..9).collect()).unwrap();
    let mut rng = RngStream::split(10, 34);
    let mut engine = PricingPosterior::new(grid.clone(), Hypothesis::Revenue);
    let mut stats = PricingStats::new(9);
    for _ in 0..40 {
        let post = engine.posterior(&stats, &prior).unwrap();
        let direct = pricing_posterior(&stats, &grid, &prior, Hypothesis::Revenue).unwrap();
        for (a, b) in post.weights().iter().zip(direct.weights()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        let j = post.sample(&mut rng).unwrap();
        let sold = simulate_demand(&valuation, grid.prices()[j], &mut rng);
        stats.update(j, sold);
    }
}
