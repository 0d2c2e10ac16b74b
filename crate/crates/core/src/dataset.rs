use crate::domain::*;

/// Every ingested record, grouped by type. Immutable once shared.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub encounters: Vec<EncounterRecord>,
    pub surgeries: Vec<SurgeryRecord>,
    pub appointments: Vec<AppointmentRecord>,
    pub process_events: Vec<ProcessEventRecord>,
    pub txns: Vec<FinancialTxn>,
    pub claims: Vec<ClaimRecord>,
    pub balances: Vec<BalanceSnapshot>,
    pub surveys: Vec<SurveyResponse>,
    pub incidents: Vec<IncidentRecord>,
    pub transplants: Vec<TransplantCase>,
    pub capacity: Vec<CapacityRecord>,
    pub staff: Vec<StaffRecord>,
    pub diverts: Vec<DivertEventRecord>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = Record>) -> Self {
        let mut ds = Dataset::default();
        for r in records {
            ds.push(r);
        }
        ds
    }

    pub fn push(&mut self, record: Record) {
        match record {
            Record::Encounter(r) => self.encounters.push(r),
            Record::Surgery(r) => self.surgeries.push(r),
            Record::Appointment(r) => self.appointments.push(r),
            Record::ProcessEvent(r) => self.process_events.push(r),
            Record::Txn(r) => self.txns.push(r),
            Record::Claim(r) => self.claims.push(r),
            Record::Balance(r) => self.balances.push(r),
            Record::Survey(r) => self.surveys.push(r),
            Record::Incident(r) => self.incidents.push(r),
            Record::Transplant(r) => self.transplants.push(r),
            Record::Capacity(r) => self.capacity.push(r),
            Record::Staff(r) => self.staff.push(r),
            Record::Divert(r) => self.diverts.push(r),
        }
    }

    pub fn len(&self) -> usize {
        self.encounters.len()
            + self.surgeries.len()
            + self.appointments.len()
            + self.process_events.len()
            + self.txns.len()
            + self.claims.len()
            + self.balances.len()
            + self.surveys.len()
            + self.incidents.len()
            + self.transplants.len()
            + self.capacity.len()
            + self.staff.len()
            + self.diverts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All records, grouped by type in [`RecordKind`] order.
    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        let enc = self.encounters.iter().cloned().map(Record::from);
        let sur = self.surgeries.iter().cloned().map(Record::from);
        let app = self.appointments.iter().cloned().map(Record::from);
        let pe = self.process_events.iter().cloned().map(Record::from);
        let txn = self.txns.iter().cloned().map(Record::from);
        let clm = self.claims.iter().cloned().map(Record::from);
        let bal = self.balances.iter().cloned().map(Record::from);
        let srv = self.surveys.iter().cloned().map(Record::from);
        let inc = self.incidents.iter().cloned().map(Record::from);
        let trn = self.transplants.iter().cloned().map(Record::from);
        let cap = self.capacity.iter().cloned().map(Record::from);
        let stf = self.staff.iter().cloned().map(Record::from);
        let div = self.diverts.iter().cloned().map(Record::from);
        enc.chain(sur)
            .chain(app)
            .chain(pe)
            .chain(txn)
            .chain(clm)
            .chain(bal)
            .chain(srv)
            .chain(inc)
            .chain(trn)
            .chain(cap)
            .chain(stf)
            .chain(div)
    }

    /// Earliest and latest timestamps carried by any event record.
    pub fn timestamp_span(&self) -> Option<(Timestamp, Timestamp)> {
        let mut span: Option<(Timestamp, Timestamp)> = None;
        let mut see = |ts: Timestamp| {
            span = Some(span.map_or((ts, ts), |(lo, hi)| (lo.min(ts), hi.max(ts))));
        };
        self.encounters.iter().for_each(|r| see(r.admit_ts));
        self.surgeries.iter().for_each(|r| see(r.actual_start));
        self.appointments.iter().for_each(|r| see(r.scheduled_ts));
        self.process_events.iter().for_each(|r| see(r.ts));
        self.txns.iter().for_each(|r| see(r.ts));
        self.claims.iter().for_each(|r| see(r.discharge_ts));
        self.surveys.iter().for_each(|r| see(r.ts));
        self.incidents.iter().for_each(|r| see(r.ts));
        for r in &self.transplants {
            see(r.listed_ts);
            if let Some(ts) = r.transplant_ts {
                see(ts);
            }
        }
        self.diverts.iter().for_each(|r| see(r.start_ts));
        span
    }

    /// Latest timestamp carried by any event record.
    pub fn latest_timestamp(&self) -> Option<Timestamp> {
        self.timestamp_span().map(|(_, hi)| hi)
    }
}
