//! Per-team token accounting with weekly budget resets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OrchestratorError;

pub const WEEK_SECONDS: i64 = 7 * 86_400;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TeamAccount {
    pub balance: f64,
    pub budget: f64,
    pub last_reset_s: i64,
}

/// Token balances per team. Balances never go negative: a charge either
/// succeeds in full or leaves the balance untouched.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct TokenLedger {
    teams: BTreeMap<String, TeamAccount>,
}

impl TokenLedger {
    pub fn new() -> Self {
        TokenLedger::default()
    }

    pub fn has_team(&self, team: &str) -> bool {
        self.teams.contains_key(team)
    }

    /// Register a team with a full budget. Existing teams are left alone.
    pub fn ensure_team(&mut self, team: &str, budget: f64, now_s: i64) {
        self.teams.entry(team.to_string()).or_insert(TeamAccount {
            balance: budget,
            budget,
            last_reset_s: now_s,
        });
    }

    pub fn account(&self, team: &str) -> Result<&TeamAccount, OrchestratorError> {
        self.teams
            .get(team)
            .ok_or_else(|| OrchestratorError::UnknownTeam {
                team: team.to_string(),
            })
    }

    pub fn balance(&self, team: &str) -> Result<f64, OrchestratorError> {
        Ok(self.account(team)?.balance)
    }

    /// Debit `cost` tokens atomically; an unaffordable charge changes nothing.
    pub fn charge(&mut self, team: &str, cost: f64) -> Result<(), OrchestratorError> {
        let balance = self.balance(team)?;
        if cost > balance {
            return Err(OrchestratorError::InsufficientTokens {
                team: team.to_string(),
                balance,
                needed: cost,
            });
        }
        self.teams.get_mut(team).expect("checked above").balance = balance - cost;
        Ok(())
    }

    /// Restore every account that is at least a week past its last reset,
    /// advancing `last_reset_s` by whole weeks only.
    pub fn weekly_reset(&mut self, now_s: i64) {
        for account in self.teams.values_mut() {
            let elapsed = now_s - account.last_reset_s;
            if elapsed >= WEEK_SECONDS {
                let weeks = elapsed / WEEK_SECONDS;
                account.balance = account.budget;
                account.last_reset_s += weeks * WEEK_SECONDS;
            }
        }
    }

    pub fn teams(&self) -> impl Iterator<Item = (&String, &TeamAccount)> {
        self.teams.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAY: i64 = 86_400;

    fn ledger() -> TokenLedger {
        let mut l = TokenLedger::new();
        l.ensure_team("wings", 100.0, 0);
        l
    }

    #[test]
    fn charge_debits_exactly() {
        let mut l = ledger();
        l.charge("wings", 60.0).unwrap();
        assert_eq!(l.balance("wings").unwrap(), 40.0);
    }

    #[test]
    fn rejected_charge_leaves_balance() {
        let mut l = ledger();
        l.charge("wings", 50.0).unwrap();
        let err = l.charge("wings", 60.0).unwrap_err();
        assert!(matches!(err, OrchestratorError::InsufficientTokens { .. }));
        assert_eq!(l.balance("wings").unwrap(), 50.0);
    }

    #[test]
    fn six_days_no_reset() {
        let mut l = ledger();
        l.charge("wings", 100.0).unwrap();
        l.weekly_reset(6 * DAY);
        assert_eq!(l.balance("wings").unwrap(), 0.0);
    }

    #[test]
    fn eight_days_resets_once() {
        let mut l = ledger();
        l.charge("wings", 100.0).unwrap();
        l.weekly_reset(8 * DAY);
        assert_eq!(l.balance("wings").unwrap(), 100.0);
        assert_eq!(l.account("wings").unwrap().last_reset_s, 7 * DAY);
    }

    #[test]
    fn fifteen_days_advances_two_whole_weeks() {
        let mut l = ledger();
        l.charge("wings", 100.0).unwrap();
        l.weekly_reset(15 * DAY);
        assert_eq!(l.balance("wings").unwrap(), 100.0);
        assert_eq!(l.account("wings").unwrap().last_reset_s, 14 * DAY);
    }

    #[test]
    fn unknown_team_is_an_error() {
        let l = ledger();
        assert!(matches!(
            l.balance("ghosts"),
            Err(OrchestratorError::UnknownTeam { .. })
        ));
    }
}
