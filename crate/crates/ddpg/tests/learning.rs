use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_ddpg::{train, ActionValue, DdpgAgent, Hyperparams, QuadraticBandit, Schedule};

/// Exact action-value `−‖a − a*‖²`, independent of the state.
struct Quadratic(Vec<f64>);

impl ActionValue for Quadratic {
    fn value_and_action_grad(&self, _states: ArrayView2<f64>, actions: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
        let target = Array1::from(self.0.clone());
        let diff = &actions - &target;
        let q = diff.rows().into_iter().map(|r| -r.dot(&r)).collect();
        (q, diff * -2.0)
    }
}

fn bandit_hyper() -> Hyperparams {
    Hyperparams {
        actor_hidden: vec![32, 32],
        critic_hidden: vec![64, 64],
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        discount: 0.0,
        batch_size: 32,
        buffer_capacity: 5_000,
        warmup_steps: 500,
        ..Hyperparams::default()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn actor_climbs_an_analytic_critic() {
    let target = vec![0.5, -0.3, 0.8, 0.0, -0.6];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agent = DdpgAgent::new(1, target.len(), bandit_hyper(), &mut rng).unwrap();
    let critic = Quadratic(target.clone());
    let states = Array2::ones((16, 1));
    for _ in 0..3000 {
        agent.actor_train_step_with(&critic, states.view());
    }
    let action = agent.actor.forward(&[1.0]).unwrap();
    assert!(distance(&action, &target) < 1e-2, "action {action:?}");
}

#[test]
fn full_loop_solves_a_quadratic_bandit() {
    let target = vec![0.4, -0.7, 0.1];
    let mut env = QuadraticBandit { target: target.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut agent = DdpgAgent::new(1, target.len(), bandit_hyper(), &mut rng).unwrap();
    let schedule = Schedule {
        episodes: 1,
        steps_per_episode: 20_000,
    };
    let mut solved_at = None;
    train(&mut env, &mut agent, schedule, &mut rng, |p, _, _, agent| {
        let greedy = agent.actor.forward(&[1.0]).unwrap();
        if p.learning && distance(&greedy, &target) <= 0.05 {
            solved_at = Some(p.step);
            return false;
        }
        true
    })
    .unwrap();
    assert!(solved_at.is_some(), "policy never reached the optimum");
}
