/// Error returned when a string does not name a member of one of the domain enums.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} '{value}'")]
pub struct UnknownVariant {
    pub kind: &'static str,
    pub value: String,
}

/// Declares a closed string enum with a stable external representation.
///
/// The serde, `Display` and `FromStr` forms all agree, so
/// `s.parse::<T>().unwrap().to_string() == s` for every member.
macro_rules! string_enum {
    (
        $(#[$meta:meta])*
        pub enum $name:ident : $label:literal {
            $($variant:ident => $text:literal),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ::serde::Serialize, ::serde::Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl ::std::str::FromStr for $name {
            type Err = $crate::domain::UnknownVariant;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err($crate::domain::UnknownVariant { kind: $label, value: other.to_string() }),
                }
            }
        }
    };
}

pub(crate) use string_enum;

string_enum! {
    pub enum EncounterKind: "encounter kind" {
        Inpatient => "inpatient",
        Outpatient => "outpatient",
        Emergency => "emergency",
    }
}

string_enum! {
    pub enum Disposition: "disposition" {
        Discharged => "discharged",
        Admitted => "admitted",
        Transferred => "transferred",
        Deceased => "deceased",
        Other => "other",
    }
}

string_enum! {
    pub enum AppointmentStatus: "appointment status" {
        Completed => "completed",
        NoShow => "no_show",
        Cancelled => "cancelled",
    }
}

string_enum! {
    /// Timestamped milestones in a patient's pathway through the hospital.
    pub enum Stage: "stage" {
        InitialAssessment => "initial_assessment",
        ConsultantInformed => "consultant_informed",
        BedAllocated => "bed_allocated",
        FirstInwardAssessment => "first_inward_assessment",
        ResultsReported => "results_reported",
        Diagnosis => "diagnosis",
        TreatmentStarted => "treatment_started",
        PreauthDone => "preauth_done",
        CounsellingDone => "counselling_done",
        MedicationGiven => "medication_given",
        DischargeBilled => "discharge_billed",
        PaymentDone => "payment_done",
    }
}

impl Stage {
    /// Clinical milestones in pathway order.
    pub const CLINICAL: &'static [Stage] = &[
        Stage::InitialAssessment,
        Stage::ConsultantInformed,
        Stage::BedAllocated,
        Stage::FirstInwardAssessment,
        Stage::ResultsReported,
        Stage::Diagnosis,
        Stage::TreatmentStarted,
    ];

    /// Administrative milestones in pathway order.
    pub const NON_CLINICAL: &'static [Stage] = &[
        Stage::PreauthDone,
        Stage::CounsellingDone,
        Stage::MedicationGiven,
        Stage::DischargeBilled,
        Stage::PaymentDone,
    ];
}

string_enum! {
    pub enum TxnCategory: "transaction category" {
        Revenue => "revenue",
        OperatingExpense => "operating_expense",
        FteCost => "fte_cost",
        AdminCost => "admin_cost",
        OvertimeCost => "overtime_cost",
        ReferralCommission => "referral_commission",
        Interest => "interest",
        Tax => "tax",
        Depreciation => "depreciation",
        Amortization => "amortization",
    }
}

impl TxnCategory {
    /// Expense lines deducted from revenue to arrive at EBITDA.
    pub const EBITDA_EXPENSES: &'static [TxnCategory] = &[
        TxnCategory::OperatingExpense,
        TxnCategory::FteCost,
        TxnCategory::AdminCost,
        TxnCategory::OvertimeCost,
        TxnCategory::ReferralCommission,
    ];

    pub fn is_expense(self) -> bool {
        self != TxnCategory::Revenue
    }
}

string_enum! {
    pub enum TxnType: "transaction type" {
        Charge => "charge",
        Payment => "payment",
        WriteOff => "write_off",
        Deposit => "deposit",
    }
}

string_enum! {
    pub enum Channel: "channel" {
        Pos => "pos",
        Bank => "bank",
        Insurance => "insurance",
    }
}

string_enum! {
    pub enum ClaimStatus: "claim status" {
        Open => "open",
        Paid => "paid",
        Partial => "partial",
        Denied => "denied",
    }
}

impl ClaimStatus {
    pub fn is_adjudicated(self) -> bool {
        self != ClaimStatus::Open
    }
}

string_enum! {
    pub enum Respondent: "respondent" {
        Patient => "patient",
        Rn => "rn",
    }
}

string_enum! {
    pub enum SurveyCategory: "survey category" {
        PatientCare => "patient_care",
        CustomerService => "customer_service",
        Nursing => "nursing",
        Overall => "overall",
        Recommend => "recommend",
    }
}

string_enum! {
    pub enum IncidentCategory: "incident category" {
        ProfessionalConduct => "professional_conduct",
        Communication => "communication",
        TreatmentCare => "treatment_care",
        WaitTime => "wait_time",
        Other => "other",
    }
}

string_enum! {
    pub enum Severity: "severity" {
        Low => "low",
        Medium => "medium",
        High => "high",
    }
}

string_enum! {
    pub enum TransplantStatus: "transplant status" {
        Active => "active",
        New => "new",
        Transplanted => "transplanted",
        Removed => "removed",
    }
}

string_enum! {
    pub enum DonorType: "donor type" {
        Living => "living",
        Deceased => "deceased",
    }
}

string_enum! {
    pub enum Outcome: "outcome" {
        Success => "success",
        Failure => "failure",
    }
}

string_enum! {
    pub enum Resource: "resource" {
        Beds => "beds",
        OrRooms => "or_rooms",
        ErBays => "er_bays",
    }
}

string_enum! {
    pub enum StaffRole: "staff role" {
        Doctor => "doctor",
        Physician => "physician",
        Rn => "rn",
        Support => "support",
    }
}
