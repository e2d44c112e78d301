use serde::{Deserialize, Serialize};

use super::{AssistanceFidelity, ObjectState, Session};
use crate::env::{shortest_path, GeodesicPath, Point};
use crate::planner::Role;
use crate::task::ObjectId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Highlight {
    pub object: ObjectId,
    #[serde(flatten)]
    pub at: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub object: ObjectId,
    pub text: String,
    pub done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checklist {
    pub numbered: bool,
    pub items: Vec<ChecklistItem>,
}

/// What the HUD shows for the current state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssistancePayload {
    pub fidelity: AssistanceFidelity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breadcrumbs: Option<GeodesicPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub highlights: Option<Vec<Highlight>>,
    pub checklist: Checklist,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Session {
    pub fn assistance_view(&self) -> AssistancePayload {
        let fidelity = self.fidelity();
        let breadcrumbs = match (fidelity, self.next_planned()) {
            (AssistanceFidelity::Optimal, Some(next)) => {
                let target = self.index().points[next];
                Some(shortest_path(self.map(), self.position(), target).expect("task locations are mutually reachable"))
            }
            _ => None,
        };
        let highlights = (fidelity == AssistanceFidelity::Highlight).then(|| {
            self.index()
                .objects
                .iter()
                .filter(|&&o| self.object_state(o) == Some(ObjectState::AtPickup))
                .map(|&o| Highlight { object: o, at: self.scenario().object(o).expect("indexed object").pickup })
                .collect()
        });
        let checklist = match fidelity {
            AssistanceFidelity::Optimal => self.plan_checklist(),
            _ => self.object_checklist(fidelity == AssistanceFidelity::Highlight),
        };
        AssistancePayload {
            fidelity,
            breadcrumbs,
            highlights,
            checklist,
            message: self.message().map(str::to_string),
        }
    }

    /// One numbered step per visit, in plan order.
    fn plan_checklist(&self) -> Checklist {
        let done = self.prefix().len();
        let items = self
            .plan()
            .route
            .0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(step, &loc)| {
                let object = self.index().object_at(loc).expect("non-depot location");
                let obj = self.scenario().object(object).expect("indexed object");
                let text = match self.index().pairing.role(loc) {
                    Role::Pickup(_) => format!("Pick up the {}", obj.display_name),
                    _ => format!("Put the {} in the {}", obj.display_name, self.bin_label(object)),
                };
                ChecklistItem { object, text, done: step < done, number: Some(step) }
            })
            .collect();
        Checklist { numbered: true, items }
    }

    /// One item per object in the session's shuffled order; finished items sink.
    fn object_checklist(&self, with_rooms: bool) -> Checklist {
        let (mut open, mut finished): (Vec<ChecklistItem>, Vec<ChecklistItem>) = self
            .checklist_order()
            .iter()
            .map(|&object| {
                let obj = self.scenario().object(object).expect("indexed object");
                let mut text = format!("Put the {} in the {}", obj.display_name, self.bin_label(object));
                if with_rooms {
                    if let Some(room) = self.map().room_at(obj.pickup) {
                        text = format!("{text} (in the {room})");
                    }
                }
                let done = self.object_state(object) == Some(ObjectState::Delivered);
                ChecklistItem { object, text, done, number: None }
            })
            .partition(|item| !item.done);
        open.append(&mut finished);
        Checklist { numbered: false, items: open }
    }

    fn bin_label(&self, object: ObjectId) -> &str {
        let category = self.scenario().object(object).expect("indexed object").category;
        &self.scenario().bin_for(category).expect("validated scenario").label
    }
}
