//! Aggregation of map, catalog, and mission parameters into the product
//! planning model: one bounded variable per state component, move /
//! reconfigure / charge commands with guards and battery updates, and a
//! time reward per action.

use super::catalog::{move_cost, move_energy_mwh};
use super::map::{rotation_time, MapArc, HEADINGS};
use super::problem::PlanningProblem;
use super::text::{
    Assignment, BinOp, Command, Expr, Formula, Func, PlanningModel, RewardItem, VarDecl,
};
use super::PlanError;

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

pub(crate) fn move_action_name(map: &super::map::EnvironmentMap, arc: &MapArc) -> String {
    format!(
        "m_{}_to_{}",
        sanitize(map.location_name(arc.from)),
        sanitize(map.location_name(arc.to))
    )
}

pub(crate) fn set_action_name(config_index: usize) -> String {
    format!("set_c{config_index}")
}

pub(crate) fn charge_action_name(map: &super::map::EnvironmentMap, loc: usize) -> String {
    format!("charge_{}", sanitize(map.location_name(loc)))
}

/// Ternary chain over the configuration variable: c=0 ? e0 : c=1 ? e1 : ... : e_last
fn config_chain(exprs: Vec<Expr>) -> Expr {
    let mut iter = exprs.into_iter().enumerate().rev();
    let (_, mut chain) = iter.next().expect("catalog is non-empty");
    for (j, expr) in iter {
        chain = Expr::Ite(
            Box::new(Expr::eq(Expr::ident("c"), Expr::Int(j as i64))),
            Box::new(expr),
            Box::new(chain),
        );
    }
    chain
}

/// Builds the guarded-command planning model for a problem.
///
/// Move commands exist only for unblocked arcs; reconfiguration commands
/// only when the catalog offers a choice and the budget allows one;
/// charge commands only at charging stations. All action time rewards
/// are non-negative by construction (asserted).
pub fn translate(problem: &PlanningProblem) -> Result<PlanningModel, PlanError> {
    problem.validate()?;
    let map = &problem.map;
    let catalog = &problem.catalog;
    let batt = problem.battery_ints();
    let n_configs = catalog.len();

    let variables = vec![
        VarDecl {
            name: "l".into(),
            min: 0,
            max: (map.locations().len() - 1) as i64,
            init: problem.start_index() as i64,
        },
        VarDecl {
            name: "r".into(),
            min: 0,
            max: 7,
            init: i64::from(problem.initial_heading.index()),
        },
        VarDecl { name: "b".into(), min: 0, max: batt.max, init: batt.initial },
        VarDecl {
            name: "c".into(),
            min: 0,
            max: (n_configs - 1) as i64,
            init: problem.initial_config_index() as i64,
        },
        VarDecl {
            name: "k".into(),
            min: 0,
            max: i64::from(problem.max_reconfigs),
            init: 0,
        },
    ];

    let mut formulas = vec![
        Formula {
            name: "goal".into(),
            expr: Expr::eq(Expr::ident("l"), Expr::Int(problem.target_index() as i64)),
        },
        Formula {
            name: "stop".into(),
            expr: Expr::or(
                Expr::ident("goal"),
                Expr::Bin(BinOp::Le, Box::new(Expr::ident("b")), Box::new(Expr::Int(batt.min))),
            ),
        },
    ];

    let not_stop = Expr::Not(Box::new(Expr::ident("stop")));
    let mut commands = Vec::new();
    let mut rewards = Vec::new();

    for arc in map.arcs() {
        if map.is_blocked(arc.from, arc.to) {
            continue;
        }
        let action = move_action_name(map, arc);

        // rotation time from each possible current heading to the arc heading
        let rot_name = format!("rot_{action}");
        let rot_chain = {
            let mut chain = Expr::Real(rotation_time(HEADINGS[7], arc.heading));
            for i in (0..7).rev() {
                chain = Expr::Ite(
                    Box::new(Expr::eq(Expr::ident("r"), Expr::Int(i as i64))),
                    Box::new(Expr::Real(rotation_time(HEADINGS[i], arc.heading))),
                    Box::new(chain),
                );
            }
            chain
        };
        formulas.push(Formula { name: rot_name.clone(), expr: rot_chain });

        // per-configuration integer battery depletion
        let upd_name = format!("b_upd_{action}");
        let depletion = config_chain(
            (0..n_configs)
                .map(|j| {
                    let energy = move_energy_mwh(arc, catalog.get(j));
                    Expr::Call(
                        Func::Max,
                        vec![
                            Expr::Int(0),
                            Expr::Bin(
                                BinOp::Sub,
                                Box::new(Expr::ident("b")),
                                Box::new(Expr::Int(energy)),
                            ),
                        ],
                    )
                })
                .collect(),
        );
        formulas.push(Formula { name: upd_name.clone(), expr: depletion });

        commands.push(Command {
            action: action.clone(),
            guard: Expr::and(
                Expr::eq(Expr::ident("l"), Expr::Int(arc.from as i64)),
                not_stop.clone(),
            ),
            updates: vec![
                Assignment { var: "l".into(), expr: Expr::Int(arc.to as i64) },
                Assignment { var: "b".into(), expr: Expr::ident(&upd_name) },
                Assignment { var: "r".into(), expr: Expr::Int(i64::from(arc.heading.index())) },
            ],
        });

        let times: Vec<Expr> = (0..n_configs)
            .map(|j| {
                let t = move_cost(arc, catalog.get(j)).time_s;
                assert!(t.is_finite() && t > 0.0, "move time must be positive");
                Expr::Real(t)
            })
            .collect();
        rewards.push(RewardItem {
            action,
            guard: Expr::Bool(true),
            expr: Expr::Bin(
                BinOp::Add,
                Box::new(config_chain(times)),
                Box::new(Expr::ident(&rot_name)),
            ),
        });
    }

    if n_configs >= 2 && problem.max_reconfigs >= 1 {
        for j in 0..n_configs {
            let action = set_action_name(j);
            commands.push(Command {
                action: action.clone(),
                guard: Expr::and(
                    Expr::and(
                        Expr::Bin(
                            BinOp::Ne,
                            Box::new(Expr::ident("c")),
                            Box::new(Expr::Int(j as i64)),
                        ),
                        Expr::Bin(
                            BinOp::Lt,
                            Box::new(Expr::ident("k")),
                            Box::new(Expr::Int(i64::from(problem.max_reconfigs))),
                        ),
                    ),
                    not_stop.clone(),
                ),
                updates: vec![
                    Assignment { var: "c".into(), expr: Expr::Int(j as i64) },
                    Assignment {
                        var: "k".into(),
                        expr: Expr::Bin(
                            BinOp::Add,
                            Box::new(Expr::ident("k")),
                            Box::new(Expr::Int(1)),
                        ),
                    },
                ],
            });
            rewards.push(RewardItem { action, guard: Expr::Bool(true), expr: Expr::Real(0.0) });
        }
    }

    for loc in map.charger_indices() {
        let action = charge_action_name(map, loc);
        commands.push(Command {
            action: action.clone(),
            guard: Expr::and(
                Expr::eq(Expr::ident("l"), Expr::Int(loc as i64)),
                not_stop.clone(),
            ),
            updates: vec![Assignment { var: "b".into(), expr: Expr::Int(batt.max) }],
        });
        // charging to full takes (max - b) / charge_rate seconds
        rewards.push(RewardItem {
            action,
            guard: Expr::Bool(true),
            expr: Expr::Bin(
                BinOp::Div,
                Box::new(Expr::Bin(
                    BinOp::Sub,
                    Box::new(Expr::Int(batt.max)),
                    Box::new(Expr::ident("b")),
                )),
                Box::new(Expr::Real(problem.charge_rate)),
            ),
        });
    }

    Ok(PlanningModel {
        formulas,
        module_name: "bot".into(),
        variables,
        commands,
        rewards_name: "time".into(),
        rewards,
    })
}
