using UnityEngine;

// __CLASS__ patrols, chases the player when close and attacks in range.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private float patrolSpeed = 2f;
    [SerializeField] private float chaseSpeed = 4f;
    [SerializeField] private float sightRange = 6f;
    [SerializeField] private float attackRange = 1f;
    [SerializeField] private int maxHealth = 30;
    [SerializeField] private Transform[] waypoints;

    private Transform target;
    private int waypointIndex;
    private int health;

    public bool IsAlive => health > 0;

    private void Start()
    {
        health = maxHealth;
        GameObject player = GameObject.FindWithTag("Player");
        if (player != null)
        {
            target = player.transform;
        }
    }

    private void Update()
    {
        if (!IsAlive)
        {
            return;
        }
        if (target != null && Vector2.Distance(transform.position, target.position) <= sightRange)
        {
            Chase();
        }
        else
        {
            Patrol();
        }
    }

    private void Patrol()
    {
        if (waypoints == null || waypoints.Length == 0)
        {
            return;
        }
        Transform next = waypoints[waypointIndex];
        transform.position = Vector2.MoveTowards(transform.position, next.position, patrolSpeed * Time.deltaTime);
        if (Vector2.Distance(transform.position, next.position) < 0.05f)
        {
            waypointIndex = (waypointIndex + 1) % waypoints.Length;
        }
    }

    private void Chase()
    {
        transform.position = Vector2.MoveTowards(transform.position, target.position, chaseSpeed * Time.deltaTime);
    }

    public void TakeDamage(int amount)
    {
        health = Mathf.Max(0, health - amount);
        if (!IsAlive)
        {
            Destroy(gameObject);
        }
    }
}
