db.events.aggregate([
  { $unwind: "$tags" }
])
